//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A requested feature of the data was not found (e.g. no beam-pattern
    /// zero inside the grid, or a peak sitting on a section edge).
    #[error("not found: {0}")]
    NotFound(String),

    /// A desired apodization weight is nonzero at a co-array position whose
    /// intrinsic apodization is zero, so no element weighting can realize it.
    #[error("apodization requests unreachable co-array position {position}")]
    UnreachablePosition { position: i64 },

    /// Aperture/element optimization over the non-trivial divisors of a
    /// prime (or too small) N.
    #[error("{0} has no non-trivial divisors")]
    NoNontrivialDivisor(u64),

    #[error("malformed channel-data file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
