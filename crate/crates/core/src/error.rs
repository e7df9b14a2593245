use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("input matrix is not symmetric")]
    AsymmetricInput,
    #[error("exact mode supports at most {max} parts, got {got}")]
    ExactTooLarge { max: usize, got: usize },
    #[error("operation needs equal part measures")]
    PartMeasureMismatch,
    #[error("kernels are not defined on the same partition")]
    PartitionMismatch,
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("QVE solver did not converge at z = {z} (residual {residual:e})")]
    NotConverged { z: Complex64, residual: f64 },
    #[error("grid too narrow: captured mass {mass} < 0.99")]
    GridTooNarrow { mass: f64 },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("k = {k} exceeds the enumeration cap {max}")]
    KTooLarge { k: usize, max: usize },
    #[error("invalid entry law: {0}")]
    InvalidLaw(String),
    #[error("Legendre inversion failed for u = {0}")]
    NoConvergence(f64),
    #[error("negative input {0}")]
    NegativeInput(f64),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("no kernel in the family meets the tolerance")]
    NoFeasibleKernel,
    #[error("tilting kernel must be strictly positive and finite")]
    KernelNotPositive,
    #[error("{k} blocks do not divide n = {n}")]
    DivisibilityError { k: usize, n: usize },
    #[error("eigenvalue computation failed: {0}")]
    EigFailure(String),
    #[error("linear solve failed")]
    SolveFailure,
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
