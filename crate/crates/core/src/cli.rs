//! The `polystar` command-line front end.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bodies::{body_by_name, polytope_radial, FacetPolytope, StarBody};
use crate::harmonics::{mollified_approx, required_rule_degree, HarmonicExpansion};
use crate::intersect::intersection_body_approx;
use crate::optimize::{maximize_on_sphere, width, ExpansionObjective, MaximizeOptions, SphereMaximum};
use crate::quadrature::{sphere_rule, SphereRule};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Mollified polynomial approximation of the body's radial function.
    Approximate,
    /// Polynomial approximation of the intersection body (R³ only).
    Intersect,
    /// Largest central slice, from the intersection-body approximation.
    Slice,
    /// Width of the polar body, from the radial approximation.
    Width,
    /// Write a quadrature rule on the sphere.
    Quadrature,
    /// Export a latitude-longitude mesh or sample grid.
    Mesh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Obj,
}

/// What the `mesh` command samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshSource {
    /// The body's exact radial function.
    Body,
    /// Its mollified approximation.
    Approximate,
    /// The intersection-body approximation.
    Intersect,
}

#[derive(Debug, Parser)]
#[command(name = "polystar", version, about = "Polynomial approximation of star bodies")]
pub struct Args {
    #[command(subcommand)]
    pub command: Command,

    /// Built-in body: cube, cylinder, tin-can, elliptope, ball, triangle.
    #[arg(long, global = true, default_value = "cube")]
    pub body: String,
    /// JSON facet description {n, facets}; overrides --body.
    #[arg(long, global = true)]
    pub facets: Option<PathBuf>,
    /// Filter parameter; the approximation has degree 2k.
    #[arg(long, global = true, default_value_t = 15)]
    pub k: usize,
    /// Quadrature slack: rules are exact in degree max(2k + m, 4k).
    #[arg(long, global = true, default_value_t = 30)]
    pub m: usize,
    /// Override the exactness degree of the quadrature rule.
    #[arg(long, global = true)]
    pub rule_degree: Option<usize>,
    /// Dimension for the quadrature command.
    #[arg(long, global = true, default_value_t = 3)]
    pub dim: usize,
    #[arg(long, global = true, default_value_t = 40)]
    pub grid_k: usize,
    #[arg(long, global = true, default_value_t = 32)]
    pub restarts: usize,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file; printed to stdout when absent.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    /// Recompute quadrature rules instead of using the on-disk cache.
    #[arg(long, global = true)]
    pub no_cache: bool,
    /// Latitude rings for meshes and sample grids.
    #[arg(long, global = true, default_value_t = 32)]
    pub lat: usize,
    /// Longitude segments for meshes and sample grids.
    #[arg(long, global = true, default_value_t = 64)]
    pub lon: usize,
    #[arg(long, global = true, value_enum, default_value = "body")]
    pub source: MeshSource,
}

/// Body given by name or by a facet file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BodySpec {
    Named(String),
    Facets(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobConfig {
    pub command: Command,
    pub body: BodySpec,
    pub k: usize,
    pub m: usize,
    pub rule_degree: Option<usize>,
    pub dim: usize,
    pub grid_k: usize,
    pub restarts: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub no_cache: bool,
    pub lat: usize,
    pub lon: usize,
    pub source: MeshSource,
}

impl Args {
    pub fn into_config(self) -> JobConfig {
        JobConfig {
            command: self.command,
            body: match self.facets {
                Some(p) => BodySpec::Facets(p),
                None => BodySpec::Named(self.body),
            },
            k: self.k,
            m: self.m,
            rule_degree: self.rule_degree,
            dim: self.dim,
            grid_k: self.grid_k,
            restarts: self.restarts,
            seed: self.seed,
            output: self.output,
            format: self.format,
            no_cache: self.no_cache,
            lat: self.lat,
            lon: self.lon,
            source: self.source,
        }
    }
}

impl JobConfig {
    /// Defaults for `command` with the named body.
    pub fn new(command: Command, body: &str) -> Self {
        Args::parse_from(["polystar", "quadrature", "--body", body])
            .into_config()
            .with_command(command)
    }

    fn with_command(mut self, command: Command) -> Self {
        self.command = command;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::Config("--k must be at least 1".into()));
        }
        if self.m < 1 {
            return Err(Error::Config("--m must be at least 1".into()));
        }
        if self.restarts < 1 {
            return Err(Error::Config("--restarts must be at least 1".into()));
        }
        if self.command == Command::Mesh || self.format != Format::Json {
            if self.lat < 3 || self.lon < 3 {
                return Err(Error::Config("--lat and --lon must be at least 3".into()));
            }
        }
        Ok(())
    }

    /// Rule parameter: rules are exact in degree 2 · rule_k.
    fn rule_k(&self) -> usize {
        let degree = self
            .rule_degree
            .unwrap_or_else(|| required_rule_degree(self.k, self.m));
        degree.div_ceil(2)
    }

    fn options(&self) -> MaximizeOptions {
        MaximizeOptions {
            restarts: self.restarts,
            grid_k: self.grid_k,
            seed: self.seed,
            ..Default::default()
        }
    }
}

/// Runs one job. Returns text for stdout: the artifact itself when no
/// output file is given, otherwise a one-line note.
pub fn run(config: &JobConfig) -> Result<String> {
    config.validate()?;
    if let Some(out) = &config.output {
        check_writable(out)?;
    }
    let (artifact, what) = match config.command {
        Command::Quadrature => {
            let rule = load_rule(config.dim, config.rule_degree.unwrap_or(2 * config.k).div_ceil(2), config.no_cache)?;
            (rule.to_json()?, "quadrature rule")
        }
        Command::Approximate | Command::Intersect => {
            let body = load_body(&config.body)?;
            let e = expansion(config, &body, config.command == Command::Intersect)?;
            let text = match config.format {
                Format::Json => e.to_json()?,
                Format::Csv => grid_csv(config.lat, config.lon, |u| e.eval_unit(u))?,
                Format::Obj => mesh_obj(config.lat, config.lon, |u| e.eval_unit(u))?,
            };
            (text, "expansion")
        }
        Command::Slice | Command::Width => {
            let body = load_body(&config.body)?;
            let is_slice = config.command == Command::Slice;
            let e = expansion(config, &body, is_slice)?;
            let result = if is_slice {
                maximize_on_sphere(
                    &ExpansionObjective {
                        expansion: &e,
                        even: true,
                    },
                    &config.options(),
                )?
            } else {
                width(&e, &config.options())?
            };
            (report(config, &body, &result)?, "report")
        }
        Command::Mesh => {
            let body = load_body(&config.body)?;
            let f: Box<dyn Fn(&[f64]) -> f64> = match config.source {
                MeshSource::Body => {
                    let b = body.clone();
                    Box::new(move |u| b.eval_unit(u))
                }
                MeshSource::Approximate | MeshSource::Intersect => {
                    let e = expansion(config, &body, config.source == MeshSource::Intersect)?;
                    Box::new(move |u| e.eval_unit(u))
                }
            };
            let text = match config.format {
                Format::Csv => grid_csv(config.lat, config.lon, f)?,
                _ => mesh_obj(config.lat, config.lon, f)?,
            };
            (text, "mesh")
        }
    };
    match &config.output {
        Some(path) => {
            write_atomic(path, &artifact)?;
            Ok(format!("wrote {what} to {}", path.display()))
        }
        None => Ok(artifact),
    }
}

fn load_body(spec: &BodySpec) -> Result<StarBody> {
    match spec {
        BodySpec::Named(name) => body_by_name(name),
        BodySpec::Facets(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            let label = path
                .file_stem()
                .map_or("polytope".into(), |s| s.to_string_lossy().into_owned());
            Ok(polytope_radial(&FacetPolytope::from_json(&text)?)?.renamed(label))
        }
    }
}

fn expansion(config: &JobConfig, body: &StarBody, intersect: bool) -> Result<HarmonicExpansion> {
    let rule = load_rule(body.dimension(), config.rule_k(), config.no_cache)?;
    if intersect {
        intersection_body_approx(body, config.k, config.m, &rule)
    } else {
        mollified_approx(body, config.k, config.m, &rule)
    }
}

/// Directory holding cached quadrature rules.
pub fn cache_dir() -> PathBuf {
    std::env::var_os("POLYSTAR_CACHE_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("polystar-cache"))
}

/// `sphere_rule(n, k)`, read from or stored in the cache unless `no_cache`.
pub fn load_rule(n: usize, k: usize, no_cache: bool) -> Result<SphereRule> {
    if no_cache {
        return sphere_rule(n, k);
    }
    let path = cache_dir().join(format!("rule-n{n}-k{k}.json"));
    if let Ok(text) = fs::read_to_string(&path) {
        if let Ok(rule) = SphereRule::from_json(&text) {
            if rule.dimension() == n && rule.k() == k {
                return Ok(rule);
            }
        }
    }
    let rule = sphere_rule(n, k)?;
    // A cache that cannot be written is not an error.
    if fs::create_dir_all(cache_dir()).is_ok() {
        let _ = write_atomic(&path, &rule.to_json()?);
    }
    Ok(rule)
}

fn check_writable(path: &Path) -> Result<()> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    if !parent.is_dir() {
        return Err(Error::Config(format!(
            "output directory {} does not exist",
            parent.display()
        )));
    }
    if path.is_dir() {
        return Err(Error::Config(format!("{} is a directory", path.display())));
    }
    let probe = parent.join(format!(".polystar-probe-{}", std::process::id()));
    fs::write(&probe, b"")
        .map_err(|e| Error::Config(format!("cannot write to {}: {e}", parent.display())))?;
    let _ = fs::remove_file(probe);
    Ok(())
}

/// Writes `text` to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let name = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    fs::write(&tmp, text)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

#[derive(Serialize)]
struct Report<'a> {
    value: f64,
    direction: &'a [f64],
    residual: f64,
    parameters: Parameters<'a>,
    seed: u64,
}

#[derive(Serialize)]
struct Parameters<'a> {
    command: &'a str,
    body: &'a str,
    k: usize,
    m: usize,
    rule_degree: usize,
    grid_k: usize,
    restarts: usize,
}

fn report(config: &JobConfig, body: &StarBody, r: &SphereMaximum) -> Result<String> {
    let rep = Report {
        value: r.value,
        direction: &r.direction,
        residual: r.refinement_residual,
        parameters: Parameters {
            command: if config.command == Command::Slice {
                "slice"
            } else {
                "width"
            },
            body: body.name(),
            k: config.k,
            m: config.m,
            rule_degree: 2 * config.rule_k(),
            grid_k: config.grid_k,
            restarts: config.restarts,
        },
        seed: config.seed,
    };
    Ok(serde_json::to_string_pretty(&rep)?)
}

/// Unit vectors of the latitude-longitude grid: north pole, `lat` rings of
/// `lon` points from north to south, south pole.
pub fn grid_points(lat: usize, lon: usize) -> Vec<[f64; 3]> {
    let mut pts = Vec::with_capacity(lat * lon + 2);
    pts.push([0.0, 0.0, 1.0]);
    for i in 1..=lat {
        let theta = std::f64::consts::PI * i as f64 / (lat + 1) as f64;
        let (st, ct) = theta.sin_cos();
        for j in 0..lon {
            let phi = std::f64::consts::TAU * j as f64 / lon as f64;
            let (sp, cp) = phi.sin_cos();
            pts.push([st * cp, st * sp, ct]);
        }
    }
    pts.push([0.0, 0.0, -1.0]);
    pts
}

fn positive_values(lat: usize, lon: usize, f: impl Fn(&[f64]) -> f64) -> Result<Vec<([f64; 3], f64)>> {
    grid_points(lat, lon)
        .into_iter()
        .map(|u| {
            let v = f(&u);
            if v > 0.0 && v.is_finite() {
                Ok((u, v))
            } else {
                Err(Error::numeric(
                    "export_mesh",
                    format!("nonpositive radial value {v} at grid point {u:?}"),
                ))
            }
        })
        .collect()
}

/// ASCII OBJ of the surface ρ(u)·u over the latitude-longitude grid.
pub fn mesh_obj(lat: usize, lon: usize, rho: impl Fn(&[f64]) -> f64) -> Result<String> {
    if lat < 3 || lon < 3 {
        return Err(Error::domain("export_mesh", "lat and lon must be at least 3"));
    }
    let values = positive_values(lat, lon, rho)?;
    let mut out = String::new();
    for (u, r) in &values {
        writeln!(out, "v {} {} {}", r * u[0], r * u[1], r * u[2]).expect("string write");
    }
    // OBJ indices are 1-based; ring i (0-based) starts at 2 + i·lon.
    let at = |i: usize, j: usize| 2 + i * lon + (j % lon);
    let south = lat * lon + 2;
    for j in 0..lon {
        writeln!(out, "f 1 {} {}", at(0, j), at(0, j + 1)).expect("string write");
    }
    for i in 0..lat - 1 {
        for j in 0..lon {
            let (a, b) = (at(i, j), at(i, j + 1));
            let (c, d) = (at(i + 1, j), at(i + 1, j + 1));
            writeln!(out, "f {a} {c} {d}").expect("string write");
            writeln!(out, "f {a} {d} {b}").expect("string write");
        }
    }
    for j in 0..lon {
        writeln!(out, "f {south} {} {}", at(lat - 1, j + 1), at(lat - 1, j)).expect("string write");
    }
    Ok(out)
}

/// CSV of unit directions and values over the latitude-longitude grid.
pub fn grid_csv(lat: usize, lon: usize, f: impl Fn(&[f64]) -> f64) -> Result<String> {
    let mut out = String::from("x,y,z,value\n");
    for u in grid_points(lat, lon) {
        writeln!(out, "{},{},{},{}", u[0], u[1], u[2], f(&u)).expect("string write");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::cube;

    fn vertices(obj: &str) -> Vec<[f64; 3]> {
        obj.lines()
            .filter_map(|l| l.strip_prefix("v "))
            .map(|l| {
                let v: Vec<f64> = l.split(' ').map(|s| s.parse().unwrap()).collect();
                [v[0], v[1], v[2]]
            })
            .collect()
    }

    #[test]
    fn mesh_topology() {
        for (lat, lon) in [(3, 3), (4, 7), (10, 20)] {
            let obj = mesh_obj(lat, lon, |_| 1.0).unwrap();
            let v = vertices(&obj);
            assert_eq!(v.len(), lat * lon + 2);
            let faces: Vec<Vec<usize>> = obj
                .lines()
                .filter_map(|l| l.strip_prefix("f "))
                .map(|l| l.split(' ').map(|s| s.parse().unwrap()).collect())
                .collect();
            assert_eq!(faces.len(), 2 * lat * lon);
            // Closed surface: every edge shared by exactly two faces.
            let mut edges = std::collections::HashMap::new();
            for f in &faces {
                for e in 0..3 {
                    let (a, b) = (f[e], f[(e + 1) % 3]);
                    *edges.entry((a.min(b), a.max(b))).or_insert(0) += 1;
                }
            }
            assert!(edges.values().all(|&c| c == 2));
            for p in v {
                let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                assert!((r - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn cube_mesh_hits_face_center() {
        let c = cube().unwrap();
        let obj = mesh_obj(3, 4, |u| c.eval_unit(u)).unwrap();
        let v = vertices(&obj);
        assert!(v
            .iter()
            .any(|p| (p[0] - 1.0).abs() < 1e-12 && p[1].abs() < 1e-12 && p[2].abs() < 1e-12));
    }

    #[test]
    fn nonpositive_mesh_value() {
        let err = mesh_obj(3, 3, |u| u[2]).unwrap_err();
        assert!(matches!(err, Error::Numeric { .. }));
        assert!(mesh_obj(2, 3, |_| 1.0).is_err());
    }

    #[test]
    fn csv_header() {
        let csv = grid_csv(3, 3, |_| 2.0).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("x,y,z,value"));
        assert_eq!(lines.count(), 11);
    }

    #[test]
    fn config_validation() {
        let mut c = JobConfig::new(Command::Slice, "ball");
        c.k = 0;
        assert!(matches!(run(&c), Err(Error::Config(_))));
        let mut c = JobConfig::new(Command::Slice, "nonsense");
        c.k = 2;
        c.m = 4;
        assert_eq!(run(&c).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn rule_degree_bookkeeping() {
        let c = JobConfig::new(Command::Approximate, "cube");
        assert_eq!(c.rule_k(), 30);
        let mut c = c;
        c.rule_degree = Some(101);
        assert_eq!(c.rule_k(), 51);
    }
}
