use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),

    #[error("members {first} and {second} of the function family are not separated")]
    DegenerateFamily { first: usize, second: usize },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("constraint {index} cannot be composed across iterated levels: {reason}")]
    NonComposable { index: usize, reason: String },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        best: Vec<f64>,
    },

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("inconsistent chain: {0}")]
    InconsistentChain(String),
}
