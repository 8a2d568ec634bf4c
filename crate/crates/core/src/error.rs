use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DfoError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("zero-width interval in coordinate {0}")]
    ZeroWidth(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("divergent integral: {0}")]
    DivergentIntegral(String),
    #[error("degenerate basis: smallest overlap eigenvalue {0:e}")]
    DegenerateBasis(f64),
    #[error("SCF did not converge in {0} iterations")]
    ScfNotConverged(usize),
}

pub type Result<T> = std::result::Result<T, DfoError>;
