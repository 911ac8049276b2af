//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by parsing, validation, and the size guards on the
/// exact enumeration oracles.
#[derive(Debug, Error)]
pub enum Error {
    /// Instance text did not conform to the file format.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// The instance exceeds a brute-force or enumeration size cap.
    #[error("instance too large: {0}")]
    TooLarge(String),
    /// A verifier was handed an object that fails its precondition.
    #[error("precondition not met: {0}")]
    Precondition(String),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn too_large(msg: impl Into<String>) -> Self {
        Error::TooLarge(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
