use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A file on disk is inconsistent with its own metadata.
    #[error("corrupt file {path}: {reason}")]
    CorruptFile { path: PathBuf, reason: String },

    /// Too few pooled values to fit a transfer function.
    #[error(
        "insufficient data at pixel {pixel}, month {month}: {source_name} sample has {size} values, at least {required} required"
    )]
    InsufficientData {
        pixel: usize,
        month: u8,
        source_name: &'static str,
        size: usize,
        required: usize,
    },

    /// Broken internal invariant (a model missing a transfer function, ...).
    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn corrupt(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::CorruptFile {
            path: path.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for this error: 1 I/O, 2 validation, 3 insufficient data.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 1,
            Error::InvalidInput(_) | Error::CorruptFile { .. } | Error::Internal(_) => 2,
            Error::InsufficientData { .. } => 3,
        }
    }
}
