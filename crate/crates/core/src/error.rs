use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the bit-pushing library and its simulation harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("value {value} is outside the representable range [{low}, {high}]")]
    OutOfRange { value: f64, low: f64, high: f64 },

    #[error("bit index {index} out of range for {width} logical bits")]
    BitIndex { index: usize, width: usize },

    #[error("expected {expected} bit means, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("invalid codec: {0}")]
    InvalidCodec(String),

    #[error("invalid sampling distribution: {0}")]
    InvalidDistribution(String),

    #[error("all bit scores are zero; no bit carries variance")]
    DegenerateDistribution,

    #[error("bit {index} has positive variance but zero sampling probability")]
    InfiniteVariance { index: usize },

    #[error("invalid epsilon {0}: must be positive")]
    InvalidEpsilon(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("no client reports to aggregate")]
    EmptyReports,

    #[error("need at least {needed} clients, got {available}")]
    InsufficientClients { needed: usize, available: usize },

    #[error("value {0} must be strictly positive")]
    NonPositive(f64),

    #[error("unknown sweep parameter `{0}`")]
    UnknownParameter(String),

    #[error("unknown method `{0}`")]
    UnknownMethod(String),

    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },

    #[error("writing output: {0}")]
    Output(String),
}

pub type Result<T> = std::result::Result<T, Error>;
