use thiserror::Error;

#[derive(Debug, Error)]
pub enum CcxError {
    #[error("invalid grid domain: {0}")]
    InvalidDomain(String),

    #[error("domain mismatch between operands")]
    DomainMismatch,

    #[error("non-finite value at node {index}")]
    NonFinite { index: usize },

    #[error("sample mask has no member nodes")]
    EmptyMask,

    #[error("empty input")]
    EmptyInput,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("M = {m} does not exceed the required threshold {threshold}")]
    BelowThreshold { m: f64, threshold: f64 },

    #[error("point is outside the convex hull of the sample set")]
    OutsideHull,

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("size guard exceeded: {0}")]
    TooLarge(String),

    #[error("grid too small: {0}")]
    GridTooSmall(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CcxError>;
