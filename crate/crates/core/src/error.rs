use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("node {node} has zero weighted degree")]
    IsolatedNode { node: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("input contains no edges")]
    EmptyInput,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dense path limited to {cap} nodes, requested {requested}")]
    DenseCapExceeded { requested: usize, cap: usize },

    #[error("non-finite load on walk {walker} from node {node}")]
    NonFiniteLoad { node: usize, walker: usize },

    #[error("operator is not positive definite ({0}); increase the noise variance")]
    NotPositiveDefinite(String),

    #[error("numerical breakdown: {0}")]
    Numerical(String),

    #[error("optimisation diverged at iteration {iteration}")]
    Divergence { iteration: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("config: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
