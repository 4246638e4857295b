use std::io;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    /// The entropy source ran out of bits.
    #[error("entropy source exhausted: {requested} bits requested after {consumed} of {capacity} consumed")]
    Exhausted {
        consumed: u64,
        requested: u64,
        capacity: u64,
    },

    /// Permutation generation stopped because the source ran dry.
    #[error("permutation generation failed after consuming {consumed} bits: {source}")]
    Generation {
        consumed: u64,
        #[source]
        source: Box<Error>,
    },

    /// Expansion stopped at a chunk because the source ran dry.
    #[error("selection for chunk {chunk} failed: {source}")]
    ChunkSelection {
        chunk: usize,
        #[source]
        source: Box<Error>,
    },

    /// A caller broke an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Input length does not agree with what the operation expects.
    #[error("length mismatch: expected {expected} bits, got {actual}")]
    LengthMismatch { expected: u64, actual: u64 },

    /// A target array is not a bijection.
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    /// Not enough data for a statistic.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Malformed or unsupported media container.
    #[error("format error: {0}")]
    Format(String),

    /// Key file could not be trusted.
    #[error("key file error: {0}")]
    KeyFile(#[from] crate::keyfile::KeyFileError),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// True when the root cause is entropy exhaustion.
    pub fn is_exhaustion(&self) -> bool {
        match self {
            Error::Exhausted { .. } => true,
            Error::Generation { source, .. } | Error::ChunkSelection { source, .. } => {
                source.is_exhaustion()
            }
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
