use std::path::PathBuf;

use ivcov_core::Error as CoreError;
use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const NONCONVERGENCE: i32 = 2;
    pub const IO: i32 = 3;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    NonConvergence(String),

    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Io { .. } => exit::IO,
            CliError::NonConvergence(_) => exit::NONCONVERGENCE,
            CliError::Core(e) => match e {
                CoreError::Io { .. }
                | CoreError::Parse { .. }
                | CoreError::EmptyInput
                | CoreError::DuplicateBar { .. }
                | CoreError::MissingBar { .. } => exit::IO,
                CoreError::InvalidInput(_)
                | CoreError::NotPositiveDefinite(_)
                | CoreError::InsufficientData { .. } => exit::USAGE,
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
