use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("no convergence after {iterations} iterations (last estimate {last}, residual {residual:e})")]
    Convergence {
        iterations: usize,
        last: f64,
        residual: f64,
    },

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("invalid domain: {0}")]
    Domain(String),

    #[error("infeasible data: {0}")]
    InfeasibleData(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("training diverged at outer iteration {outer}, step {step}: {reason}")]
    Divergence {
        outer: usize,
        step: usize,
        reason: String,
    },

    #[error("state blew up at t = {time} (trajectory kept up to the last finite state)")]
    BlowUp {
        time: f64,
        trajectory: Box<crate::dynamics::Trajectory<f64>>,
    },

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn dim_err(msg: impl Into<String>) -> Error {
    Error::Dimension(msg.into())
}
