//! Crate-wide error type.

use crate::sparse::SolveReport;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("linear solve did not converge after {} iterations (relative residual {:.3e})",
            .0.iterations, .0.relative_residual)]
    SolveFailed(SolveReport),

    #[error("singular matrix in direct solve")]
    SingularMatrix,

    #[error("time step {step} failed: {source}")]
    StepFailed {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Attach the failing step index to an error bubbling out of a solve.
    pub fn at_step(self, step: usize) -> Error {
        Error::StepFailed {
            step,
            source: Box::new(self),
        }
    }
}
