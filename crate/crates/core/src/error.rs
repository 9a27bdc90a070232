use thiserror::Error;

/// Errors raised by estimation, testing and I/O routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("parameter vector contains non-finite entries")]
    NonFiniteParameter,

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("covariance matrix is not positive definite at t={t}")]
    NotPositiveDefinite { t: usize },

    #[error("regressor matrix is rank deficient (column {column})")]
    RankDeficient { column: usize },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("insufficient sample: {have} observations, need more than {need}")]
    InsufficientSample { have: usize, need: usize },

    #[error("degenerate variance: residuals are identically zero")]
    DegenerateVariance,

    #[error("all {0} bootstrap refits failed")]
    AllBootstrapFitsFailed(usize),

    #[error("block [{start}, {start}+{len}) outside sample of length {n}")]
    BlockOutOfRange { start: usize, len: usize, n: usize },

    #[error("block-size grid needs at least 3 values, got {0}")]
    GridTooSmall(usize),

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
