use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("field order {p}^{k} exceeds 256")]
    FieldTooLarge { p: u32, k: u32 },
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("element {value} is out of range for F_{q}")]
    ElementOutOfRange { value: u32, q: usize },
    #[error("operands belong to different fields (F_{left} vs F_{right})")]
    FieldMismatch { left: usize, right: usize },
    #[error("zero has no multiplicative inverse")]
    DivisionByZero,
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("dimension must be at least {min}, got {n}")]
    DimensionTooSmall { n: usize, min: usize },
    #[error("index ({i}, {j}) is invalid for dimension {n}")]
    InvalidIndex { i: usize, j: usize, n: usize },
    #[error("expected {expected} entries, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("group of order {order} exceeds the configured bound {bound}")]
    OverBound { order: u128, bound: usize },
    #[error("search budget of {budget} nodes exhausted after {explored} nodes; no result reported")]
    BudgetExceeded { budget: u64, explored: u64 },
    #[error("invalid central function: {0}")]
    InvalidCentralFunction(String),
    #[error("no decomposition found: {0}")]
    NoDecomposition(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
