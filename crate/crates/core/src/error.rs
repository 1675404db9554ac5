use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be at least 1")]
    ZeroDimension,

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("tensor shape mismatch: (dim {0}, degree {1}) vs (dim {2}, degree {3})")]
    ShapeMismatch(usize, usize, usize, usize),

    #[error("matrix is not symmetric: |M[{i}][{j}] - M[{j}][{i}]| = {gap:e}")]
    NotSymmetric { i: usize, j: usize, gap: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    /// The almost-sure displacement bound is too weak for the series tail to be
    /// controlled within the depth cap.
    #[error("truncation not certified: {0}")]
    TruncationNotCertified(String),

    #[error("series not certifiable: {0}")]
    SeriesNotCertifiable(String),

    #[error("exchangeable process required: {0}")]
    NotExchangeable(String),

    #[error("assignment size {n} exceeds the exact-solver cap {cap}; use the Sinkhorn estimator")]
    CapExceeded { n: usize, cap: usize },

    #[error("model `{model}` lacks required moment: {what}")]
    MissingMoment { model: String, what: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
