use thiserror::Error;

use crate::series::DataKind;

pub type Result<T> = std::result::Result<T, Error>;

/// Reasons a changepoint position list is not a valid segmentation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SegmentationError {
    #[error("changepoint {position} must be at least 1")]
    NonPositive { position: usize },
    #[error("changepoint {position} must be below n = {n}")]
    OutOfRange { position: usize, n: usize },
    #[error("duplicate changepoint at {position}")]
    Duplicate { position: usize },
    #[error("changepoints not sorted: {previous} precedes {position}")]
    Unsorted { previous: usize, position: usize },
    #[error("segmentations differ by more than one elementary edit")]
    NotElementaryEdit,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("series has length {0}; at least 2 observations are required")]
    TooShort(usize),
    #[error("invalid {kind:?} observation {value} at index {index}: {reason}")]
    InvalidValue {
        kind: DataKind,
        index: usize,
        value: f64,
        reason: &'static str,
    },
    #[error("model expects {expected:?} data but the series is {found:?}")]
    KindMismatch { expected: DataKind, found: DataKind },
    #[error("invalid segmentation: {0}")]
    Segmentation(#[from] SegmentationError),
    #[error("segment {s}..={t} is out of range for n = {n}")]
    SegmentRange { s: usize, t: usize, n: usize },
    #[error("invalid parameter {name} = {value}: {reason}")]
    Parameter {
        name: String,
        value: f64,
        reason: &'static str,
    },
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("instance too large: {count} segmentations exceed the limit of {limit}")]
    TooLarge { count: u128, limit: u128 },
    #[error("{0} is empty")]
    Empty(&'static str),
}

impl Error {
    pub(crate) fn parameter(name: &str, value: f64, reason: &'static str) -> Self {
        Error::Parameter {
            name: name.to_string(),
            value,
            reason,
        }
    }
}
