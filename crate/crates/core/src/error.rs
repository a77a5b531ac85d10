use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("mask side {side} exceeds the exact-enumeration limit {limit}; use sampled verification")]
    TooLarge { side: usize, limit: usize },

    #[error("unsupported layer shape {rows}x{cols}: {reason} (nearest supported: {nearest})")]
    UnsupportedShape {
        rows: usize,
        cols: usize,
        reason: String,
        nearest: String,
    },

    #[error("spectrum undefined: {0}")]
    UndefinedSpectrum(String),

    #[error("degenerate subset: {0}")]
    DegenerateSubset(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error("layer {index}: {source}")]
    Layer {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    /// Process exit code used by the command-line front end.
    ///
    /// 2 for argument errors, 3 for precondition or verification failures,
    /// 4 for I/O and integrity errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Argument(_) | Error::TooLarge { .. } | Error::UnsupportedShape { .. } => 2,
            Error::Precondition(_) | Error::UndefinedSpectrum(_) | Error::DegenerateSubset(_) => 3,
            Error::Format(_) | Error::Integrity(_) | Error::Io(_) => 4,
            Error::Layer { source, .. } => source.exit_code(),
        }
    }
}
