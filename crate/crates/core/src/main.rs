use clap::Parser;

fn main() {
    let args = polystar::cli::Args::parse();
    match polystar::cli::run(&args.into_config()) {
        Ok(summary) => {
            if summary.ends_with('\n') {
                print!("{summary}");
            } else if !summary.is_empty() {
                println!("{summary}");
            }
        }
        Err(err) => {
            eprintln!("polystar: {err}");
            std::process::exit(err.exit_code());
        }
    }
}
