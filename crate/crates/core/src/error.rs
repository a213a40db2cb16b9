use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum JlsError {
    /// An argument outside the domain of a numeric routine.
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    /// Caller supplied inconsistent or invalid parameters.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An input file failed to parse or validate.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// Data failed a semantic check (alignment, coding, missingness).
    #[error("validation error: {0}")]
    Validation(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl JlsError {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        JlsError::Domain {
            func,
            detail: detail.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        JlsError::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by the content of input data rather than
    /// the environment or the caller's parameters.
    pub fn is_data_error(&self) -> bool {
        matches!(self, JlsError::Parse { .. } | JlsError::Validation(_))
    }
}

pub type Result<T> = std::result::Result<T, JlsError>;
