use thiserror::Error;

/// Errors raised by model construction, encoding, and landscape analysis.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    Dimensions(String),

    #[error("term ({i}, {j}, {alpha}, {beta}) is not canonical: {reason}")]
    NonCanonical {
        i: usize,
        j: usize,
        alpha: usize,
        beta: usize,
        reason: &'static str,
    },

    #[error("duplicate term ({i}, {j}, {alpha}, {beta})")]
    DuplicateTerm {
        i: usize,
        j: usize,
        alpha: usize,
        beta: usize,
    },

    #[error("coefficient must be finite, got {0}")]
    NonFinite(f64),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("index {index} out of range for {len} variables")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid permutation for register {register}: {reason}")]
    Permutation { register: usize, reason: String },

    #[error("{n} variables exceeds the enumeration cap of {cap}")]
    CapExceeded { n: usize, cap: usize },

    #[error("unsupported encoding: {0}")]
    Unsupported(String),

    #[error("solution is not valid: {0}")]
    InvalidSolution(String),

    #[error("degenerate instance: {0}")]
    Degenerate(String),

    #[error("invalid annealing schedule: {0}")]
    Schedule(String),

    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
