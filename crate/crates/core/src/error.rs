use std::path::PathBuf;
use thiserror::Error;

/// Errors produced by the reconstruction library.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument violates a precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An iterative kernel failed to produce a usable result.
    #[error("numerical failure: {reason}")]
    Numerical {
        reason: String,
        /// Residual or diverging value at the point of failure, when meaningful.
        residual: Option<f64>,
        /// Iteration index at the point of failure, when meaningful.
        iteration: Option<usize>,
    },

    /// A text input could not be parsed.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// File system failure, annotated with the path involved.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn numerical(reason: impl Into<String>) -> Self {
        Error::Numerical {
            reason: reason.into(),
            residual: None,
            iteration: None,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
