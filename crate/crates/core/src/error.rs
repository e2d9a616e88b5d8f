use thiserror::Error;

use crate::deployment::SwapLog;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Rejected configuration (bad counts, ranges, units).
    #[error("invalid configuration: {0}")]
    Config(String),
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A solution state violating one of the structural constraints.
    #[error("invalid solution state: {0}")]
    State(String),
    /// Numerical evaluation broke down (zero rate, non-finite score).
    #[error("evaluation error: {0}")]
    Evaluation(String),
    /// Instance exceeds an enumeration cap.
    #[error("instance too large: {0}")]
    Capacity(String),
    /// The swap loop ran past its cap; the log is kept for diagnosis.
    #[error("swap cap exceeded after {executed} executed swaps")]
    SwapCap { executed: usize, log: SwapLog },
    /// Failure inside one stage of the alternating optimizer.
    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
