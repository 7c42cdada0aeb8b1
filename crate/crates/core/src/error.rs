use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("variable count mismatch: {left} vs {right}")]
    VarMismatch { left: usize, right: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    ShapeMismatch { op: &'static str, left: (usize, usize), right: (usize, usize) },

    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),

    #[error("matrix is not symmetric")]
    NotSymmetric,

    #[error("malformed witness: {0}")]
    MalformedWitness(String),

    #[error("constraint sets differ")]
    ConstraintMismatch,

    #[error("too many constraints: {found} (limit {limit})")]
    TooManyConstraints { found: usize, limit: usize },

    #[error("variable index {index} out of range for {nvars} variables")]
    VarIndex { index: usize, nvars: usize },

    #[error("Gram matrix is not positive semidefinite")]
    NotPsd,

    #[error("constant must be positive, got {0}")]
    NonPositive(String),

    #[error("identity check failed: {0}")]
    IdentityFailed(String),

    #[error("degree bound too small: {0}")]
    DegreeTooSmall(String),

    #[error("affine constraints are inconsistent")]
    Inconsistent,

    #[error("numeric breakdown: {0}")]
    NumericBreakdown(String),

    #[error("rationalization failed: ladder exhausted (smallest pivot {smallest_pivot:e})")]
    LadderExhausted { smallest_pivot: f64 },

    #[error("no certificate found at bounds: {0}")]
    NotFound(String),

    #[error("assembly failed at {step}: {detail}")]
    Assembly { step: &'static str, detail: String },

    #[error("principal block {path}: {source}")]
    Recursion { path: String, source: Box<Error> },
    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("{0}")]
    Io(String),
}
