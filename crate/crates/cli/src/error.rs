use nonlocal_cu::SolverError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("{0} invariant check(s) failed")]
    ChecksFailed(usize),
}

impl CliError {
    /// 1 for invalid input, 2 for numerical failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Solver(e) if e.is_numerical() => 2,
            CliError::ChecksFailed(_) => 2,
            _ => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Solver(SolverError::Io(e))
    }
}
