use thiserror::Error;

/// Errors raised across model construction, multiplier assembly and synthesis.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("rank deficient: {what} has rank {rank}, expected {expected}")]
    RankDeficient {
        what: String,
        rank: usize,
        expected: usize,
    },

    #[error("matrix `{0}` is not symmetric")]
    NotSymmetric(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("problem is infeasible: {0}")]
    Infeasible(String),

    #[error("problem is unbounded: {0}")]
    Unbounded(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("inertia violation: {0}")]
    InertiaViolation(String),

    #[error("system is unstable (spectral radius {0})")]
    UnstableSystem(f64),

    #[error("constraint references undeclared variable index {0}")]
    UnreferencedVariable(usize),

    #[error("parse error at `{path}`: {message}")]
    Parse { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }
}
