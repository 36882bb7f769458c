use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("size cap exceeded: {what} = {value} (max {max})")]
    SizeCap {
        what: &'static str,
        value: usize,
        max: usize,
    },

    #[error("integer overflow: {0}; use the big-count mode")]
    Overflow(String),

    #[error("root finding did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("malformed sequence: {0}")]
    MalformedSequence(String),

    #[error("missing timestamps on update sequence")]
    MissingPositions,

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
