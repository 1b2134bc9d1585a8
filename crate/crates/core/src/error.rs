use thiserror::Error;

/// Errors raised by the numerical pipeline and the command-line front end.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("{op}: domain error: {msg}")]
    Domain { op: &'static str, msg: String },

    /// A numerical routine failed to produce a trustworthy result.
    #[error("{op}: numeric error: {msg}")]
    Numeric { op: &'static str, msg: String },

    /// Every refinement of a sphere maximization failed.
    #[error("{op}: optimization failed from every start (best coarse value {best_coarse})")]
    Optimization { op: &'static str, best_coarse: f64 },

    /// A reciprocal was requested of a nonpositive value.
    #[error("{op}: nonpositive value {value} at {point:?}")]
    Positivity {
        op: &'static str,
        value: f64,
        point: Vec<f64>,
    },

    /// Invalid configuration or input file.
    #[error("{0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain {
            op,
            msg: msg.into(),
        }
    }

    pub(crate) fn numeric(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Numeric {
            op,
            msg: msg.into(),
        }
    }

    /// Process exit status for this error: 2 for domain and configuration
    /// problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain { .. } | Error::Config(_) | Error::Io(_) | Error::Json(_) => 2,
            Error::Numeric { .. } | Error::Optimization { .. } | Error::Positivity { .. } => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
