use thiserror::Error;

/// Errors raised by the solver.
#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("CFL violation: {0}")]
    CflViolation(String),
    #[error("domain violation: {0}")]
    DomainViolation(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl SolverError {
    /// True for failures that stem from the numerics rather than the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            SolverError::NumericalFailure(_) | SolverError::CflViolation(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, SolverError>;
