use std::io;

use thiserror::Error;

/// Failure classes, each with its own process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Format(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Bound(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FORMAT: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_BOUND: i32 = 4;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => EXIT_USAGE,
            CliError::Format(_) => EXIT_FORMAT,
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Bound(_) => EXIT_BOUND,
        }
    }

    pub(crate) fn usage(msg: impl ToString) -> Self {
        CliError::Usage(msg.to_string())
    }

    pub(crate) fn format(msg: impl ToString) -> Self {
        CliError::Format(msg.to_string())
    }
}
