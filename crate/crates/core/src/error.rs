use thiserror::Error;

pub type Result<T> = std::result::Result<T, AqrmError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AqrmError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numeric domain error: {0}")]
    NumericDomain(String),

    #[error("eigensolver did not converge after {iterations} iterations (worst residual {residual:.3e}, {converged}/{requested} pairs converged)")]
    Iteration {
        iterations: usize,
        residual: f64,
        converged: usize,
        requested: usize,
    },

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("bracketing error: {0}")]
    Bracketing(String),

    #[error("ambiguous crossing: {} sign changes at {candidates:?}", candidates.len())]
    AmbiguousCrossing { candidates: Vec<f64> },

    #[error("norm drift {drift:.3e} exceeds bound at t = {time:.6e}; try dt <= {suggested_dt:.3e}")]
    StepSize {
        drift: f64,
        time: f64,
        suggested_dt: f64,
    },

    #[error("truncation error: {0}")]
    Truncation(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("cutoff not converged: reached cap {cap} (last relative change {last_change:.3e})")]
    Unconverged { cap: usize, last_change: f64 },
}

impl AqrmError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        AqrmError::InvalidArgument(msg.into())
    }
}
