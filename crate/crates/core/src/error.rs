//! Error type shared across the crate.

use std::path::PathBuf;

/// Everything that can go wrong while loading data or running an audit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A file could not be read or written.
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A file was read but its contents could not be parsed. `line` is
    /// 1-based and refers to the physical line when known, 0 otherwise.
    #[error("{path}:{line}: {message}")]
    Malformed {
        path: PathBuf,
        line: u64,
        message: String,
    },

    /// Structurally valid input that violates a semantic rule, e.g. a
    /// duplicate rank or a label for an unknown document.
    #[error("{0}")]
    Invalid(String),

    /// A computation whose inputs make the result undefined, e.g. a
    /// t-test over a constant sample.
    #[error("{0}")]
    Degenerate(String),
}

impl Error {
    /// Wraps an I/O failure with the path that triggered it.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Builds a parse error pinned to a file location.
    pub fn malformed(path: impl Into<PathBuf>, line: u64, message: impl Into<String>) -> Self {
        Error::Malformed {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
