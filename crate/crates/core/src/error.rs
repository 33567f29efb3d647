use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not square: {0} x {1}")]
    NotSquare(usize, usize),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("zero diagonal entry in row {0}")]
    ZeroDiagonal(usize),

    #[error("edge ({0}, {1}) is already part of the subgraph")]
    EdgeInSubgraph(usize, usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("requested {requested} clusters but only {available} distinct eigen-directions are available")]
    TooFewEigenvalues { requested: usize, available: usize },

    #[error("solver did not converge: relative residual {residual:.3e} after {iterations} iterations")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
