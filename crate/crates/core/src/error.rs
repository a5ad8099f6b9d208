use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("vector must have at least one entry")]
    EmptyVector,

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("point sample is empty")]
    EmptySample,

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("alpha unknown: {0}")]
    AlphaUnknown(String),

    #[error("string index {index} out of range 1..={m}")]
    IndexOutOfRange { index: usize, m: usize },

    #[error("weights must be positive and sum to 1 (sum = {sum})")]
    WeightSum { sum: f64 },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("relaxation parameter lambda_{k} = {lambda} outside [{lo}, {hi}]")]
    RelaxationRange { k: usize, lambda: f64, lo: f64, hi: f64 },

    #[error("invalid tolerances: {0}")]
    InvalidTolerances(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("iteration cap of {cap} exceeded (residual {residual:e})")]
    IterationCap { cap: usize, residual: f64 },

    #[error("oracle failure: {0}")]
    Oracle(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
