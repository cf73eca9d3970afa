use thiserror::Error;

/// Errors raised by dataset construction, smoothing and evaluation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("variable {var}: every subject has zero observations")]
    AllEmpty { var: usize },

    #[error("variables ({j}, {k}): no subject contributes a valid observation pair")]
    NoPairs { j: usize, k: usize },

    #[error("local system is singular at {location}")]
    SingularSystem { location: String },

    #[error("bandwidth {bandwidth} is below the binned minimum {minimum} for a {bins}-bin grid")]
    BandwidthTooSmallForGrid {
        bandwidth: f64,
        minimum: f64,
        bins: usize,
    },

    #[error("invalid bandwidth {0}: must lie in (0, 1]")]
    InvalidBandwidth(f64),

    #[error("observation time {0} lies outside [0, 1]")]
    TimeOutOfRange(f64),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("index out of range: {what} = {index}, limit {limit}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        limit: usize,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("estimate has {failed} failed grid cells")]
    IncompleteEstimate { failed: usize },

    #[error("brute-force search over {count} assignments exceeds the limit {limit}")]
    TooLarge { count: f64, limit: f64 },

    #[error("rate fit needs positive inputs, got {0}")]
    NonPositive(f64),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
