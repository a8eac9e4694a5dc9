use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration for `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: achieved {achieved:.3e}, target {target:.3e}")]
    NonConvergence { achieved: f64, target: f64 },

    #[error("load support {support} exceeds tractability limit {limit}")]
    SupportTooLarge { support: usize, limit: usize },

    #[error("degenerate load distribution: zero variance (point mass at {mean})")]
    PointMass { mean: f64 },

    #[error("index out of range: {0}")]
    Index(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
