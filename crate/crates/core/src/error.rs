use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {detail}")]
    Dimension { op: &'static str, detail: String },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("rank {k} out of range (max {max})")]
    RankOutOfRange { k: usize, max: usize },

    #[error("{what} is rank deficient: sigma_min = {sigma_min:e} <= tol = {tol:e}")]
    RankDeficient {
        what: &'static str,
        sigma_min: f64,
        tol: f64,
    },

    #[error("SVD failed to converge after {iterations} iterations")]
    Convergence { iterations: usize },

    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("columns are not orthonormal: max |Q^T Q - I| = {deviation:e}")]
    NotOrthonormal { deviation: f64 },

    #[error("tiny pivot {pivot:e} at elimination step {step}")]
    TinyPivot { step: usize, pivot: f64 },

    #[error("row selection failed: {0}")]
    Selection(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_err(op: &'static str, detail: impl Into<String>) -> Error {
    Error::Dimension {
        op,
        detail: detail.into(),
    }
}
