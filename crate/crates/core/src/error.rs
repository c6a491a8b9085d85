use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A grey tone or scalar fell outside the domain of a LIP operation.
    #[error("{what} = {value} is outside the valid domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: String,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("region is empty")]
    EmptyRegion,

    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    /// A pixel-wise LIP transform produced (or would produce) a value out of range.
    #[error("pixel ({x}, {y}) with value {value} leaves the grey scale under {op}")]
    RangeViolation {
        x: usize,
        y: usize,
        value: f64,
        op: String,
    },

    #[error("pixel ({x}, {y}) = {value} is not an integer grey level")]
    NotQuantized { x: usize, y: usize, value: f64 },

    #[error("unsupported channel count {0}")]
    UnsupportedChannels(usize),

    #[error("seed is empty")]
    EmptySeed,

    #[error("seed ({x}, {y}) lies outside the {width}x{height} image")]
    SeedOutOfBounds {
        x: usize,
        y: usize,
        width: usize,
        height: usize,
    },

    #[error("seed region is not homogeneous: criterion {value} > threshold {threshold}")]
    SeedNotHomogeneous { value: f64, threshold: f64 },

    #[error("contraction would remove a seed pixel while the region is still inhomogeneous (criterion {value} > {threshold})")]
    DegenerateContraction { value: f64, threshold: f64 },

    #[error("malformed image data: {0}")]
    Format(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(what: &'static str, value: f64, domain: impl Into<String>) -> Self {
        Error::Domain {
            what,
            value,
            domain: domain.into(),
        }
    }

    /// True for I/O and file-format failures, as opposed to violated preconditions.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. } | Error::Format(_))
    }
}
