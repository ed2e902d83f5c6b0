use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("rejected input: {0}")]
    RejectedInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("singular operator: {0}")]
    SingularOperator(String),

    #[error("invalid Rényi order {0} (orders must be positive and different from 1)")]
    InvalidOrder(f64),

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("dimension cap exceeded: {0}")]
    CapExceeded(String),

    #[error(
        "solver did not converge in {iterations} iterations \
         (primal {primal_objective:.3e}, dual {dual_objective:.3e}, gap {gap:.3e})"
    )]
    NonConvergence {
        iterations: usize,
        primal_objective: f64,
        dual_objective: f64,
        gap: f64,
    },

    #[error("infeasible problem: {0}")]
    Infeasible(String),

    #[error("malformed state file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
