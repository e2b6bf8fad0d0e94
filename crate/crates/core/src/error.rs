use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("capacity exceeded: {expected_marks:.3e} expected marks, cap is {cap:.3e}")]
    Capacity { expected_marks: f64, cap: f64 },

    #[error("truncation failure: occupied set became empty under truncation at {truncation_lo}")]
    TruncationFailure { truncation_lo: i32 },

    #[error("all {replicas} replicas were excluded")]
    AllExcluded { replicas: usize },

    #[error("quantile undefined: {uncensored} uncensored of {total} samples")]
    QuantileUndefined { uncensored: usize, total: usize },

    #[error("insufficient samples: need {needed}, have {have}")]
    InsufficientSamples { needed: usize, have: usize },

    #[error("malformed construction dump: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
