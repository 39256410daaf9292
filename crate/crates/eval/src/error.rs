use thiserror::Error;

pub type Result<T, E = EvalError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Core(#[from] scd_core::Error),
    #[error("found only {achieved} of {wanted} dissimilar sentence pairs")]
    PairingExhausted { achieved: usize, wanted: usize },
    #[error("not a probability distribution: {0}")]
    NotADistribution(String),
    #[error("models share no sentence")]
    AlignmentError,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("plot: {0}")]
    Plot(String),
}
