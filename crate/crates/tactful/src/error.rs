use std::io;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An internal invariant was violated. Indicates corrupt inputs or a bug,
    /// not a recoverable condition.
    #[error("invariant violation: {0}")]
    Invariant(String),

    /// Malformed response data. `line` is the 1-based line number in the
    /// source file (the header is line 1).
    #[error("parse error at line {line}, field `{field}`: {message}")]
    Parse {
        line: usize,
        field: String,
        message: String,
    },

    /// Malformed or out-of-range parameter file contents.
    #[error("parameter file error: field `{field}`: {message}")]
    ParamFile { field: String, message: String },

    /// A numeric evaluation produced a non-finite value or failed to converge.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A resampling procedure lost too many replicates to be trustworthy.
    #[error("unreliable result: {0}")]
    Unreliable(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
