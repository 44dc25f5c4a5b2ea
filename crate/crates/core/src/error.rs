use thiserror::Error;

/// Errors raised by the geometric primitives, solvers and oracles.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operation requires dimension {required}, point set has dimension {found}")]
    UnsupportedDimension { required: usize, found: usize },

    #[error("power gradient must be a finite value >= 1, got {0}")]
    InvalidAlpha(f64),

    #[error("epsilon must lie in (0, 1], got {0}")]
    InvalidEpsilon(f64),

    #[error("point set is empty")]
    EmptyPointSet,

    #[error("coordinates must be finite")]
    NonFiniteCoordinate,

    #[error("index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("oracle refused: {problem} instance has {size} points, budget allows {cap}")]
    BudgetExceeded {
        problem: &'static str,
        size: usize,
        cap: usize,
    },

    #[error("oracle refused: time limit of {0:?} exceeded")]
    TimeLimit(std::time::Duration),

    #[error("not a permutation of 0..{0}")]
    NotAPermutation(usize),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
