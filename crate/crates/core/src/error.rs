use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid box partition: {0}")]
    InvalidPartition(String),

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("potential is singular at node {0}")]
    SingularNode(f64),

    #[error("tabulated potential does not match the grid: {0}")]
    TabulatedMismatch(String),

    #[error("operator is not positive definite: {count} eigenvalue(s) at or below zero")]
    Indefinite { count: usize },

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("iteration failure at step {step}: {reason}")]
    Iteration { step: usize, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
