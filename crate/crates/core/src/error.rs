use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {actual} ({context})")]
    DimensionMismatch {
        expected: usize,
        actual: usize,
        context: &'static str,
    },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("seminorm undefined: path has fewer than two samples")]
    SeminormUndefined,

    #[error("non-finite value at node {node}")]
    NonFinite { node: usize },

    #[error("outside Young-eligibility: {0}")]
    YoungIneligible(String),

    #[error("equivalence criterion requires β>1 (got {0})")]
    EquivalenceExponent(f64),

    #[error("value {value} at node {node} lies outside the bin range [{z_min}, {z_max}]")]
    OutsideBins {
        value: f64,
        node: usize,
        z_min: f64,
        z_max: f64,
    },

    #[error("query {query} outside representable range [{lo}, {hi}]")]
    OutsideRange { query: f64, lo: f64, hi: f64 },

    #[error("germ evaluation failed on ({s}, {t}): non-finite output")]
    GermEvaluation { s: f64, t: f64 },

    #[error("Newton iteration did not converge at step {step} (last residual {residual:e})")]
    NewtonFailure { step: usize, residual: f64 },

    #[error("not positive definite: {0}")]
    NotPositiveDefinite(&'static str),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
