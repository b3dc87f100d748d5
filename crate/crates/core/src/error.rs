use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("operator is not Hermitian (max drift {0:.3e})")]
    NotHermitian(f64),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("triple validation failed:\n{0}")]
    Validation(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("not a homomorphism: {0}")]
    NotHomomorphism(String),
    #[error("homomorphism is not surjective (rank {rank} < target dimension {target_dim})")]
    NotSurjective { rank: usize, target_dim: usize },
    #[error("no convergence after {iterations} iterations; distance lies in [{lower}, {upper}]")]
    IterationLimit {
        iterations: usize,
        lower: f64,
        upper: f64,
    },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("grid: {0}")]
    Grid(String),
    #[error("inconsistent classification: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn shape(msg: impl Into<String>) -> Error {
    Error::Shape(msg.into())
}
