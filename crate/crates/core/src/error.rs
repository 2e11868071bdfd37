use thiserror::Error;

/// Errors raised by the heat-semigroup library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("complex time {re}{im:+}i is outside the closed right half-plane domain (need Re > 0 or exactly 0)")]
    InvalidTime { re: f64, im: f64 },

    #[error("complex time with arg {arg} lies outside the sector |arg| < {alpha}")]
    OutsideSector { arg: f64, alpha: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-finite value produced at point {point:?}")]
    NonFinite { point: Vec<f64> },

    #[error("empty grid window")]
    EmptyGrid,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}
