use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// How a positive-definiteness check failed.
#[derive(Debug, Clone, PartialEq)]
pub enum PdViolation {
    /// Cholesky hit a nonpositive pivot at this (zero-based) index.
    Pivot { index: usize, value: f64 },
    /// The smallest eigenvalue is not strictly positive.
    MinEigenvalue(f64),
}

impl fmt::Display for PdViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PdViolation::Pivot { index, value } => {
                write!(f, "nonpositive pivot {value:e} at index {index}")
            }
            PdViolation::MinEigenvalue(v) => write!(f, "smallest eigenvalue {v:e}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(PdViolation),

    #[error("insufficient data: need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate bar for {symbol} at timestamp {timestamp}")]
    DuplicateBar { symbol: String, timestamp: i64 },

    #[error("input contains no data rows")]
    EmptyInput,

    #[error("symbol {symbol} has no bar for slot {slot}")]
    MissingBar { symbol: String, slot: i64 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
