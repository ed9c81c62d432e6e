use thiserror::Error;

use crate::scalar::Backend;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("backend mismatch: {0} vs {1}")]
    BackendMismatch(Backend, Backend),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is singular")]
    Singular,
    #[error("subspace is not invariant: column {column} leaves the span (residual {residual:e})")]
    NotInvariant { column: usize, residual: f64 },
    #[error("spectral twist must be nonzero")]
    ZeroTwist,
    #[error("invalid permutation {0:?}")]
    InvalidPermutation(Vec<usize>),
    #[error("consistency check failed: {0}")]
    Consistency(String),
    #[error("parameter sampling gave up after {0} rejections")]
    SamplingExhausted(usize),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
