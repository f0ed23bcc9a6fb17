//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("operands belong to different algebra signatures")]
    SignatureMismatch,
    #[error("tensor arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("tensor arity {0} out of supported range 1..=4")]
    ArityOutOfRange(usize),
    #[error("slot {slot} invalid for arity {arity}")]
    InvalidSlot { slot: usize, arity: usize },
    #[error("insert mode {mode} requires arity 2, found {arity}")]
    ModeNeedsArity2 { mode: &'static str, arity: usize },
    #[error("variable index {0} out of range")]
    VarOutOfRange(usize),
    #[error("matrix size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },
    #[error("vector length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("formal variable index {0} out of range")]
    FormalVarOutOfRange(usize),
    #[error("skewsymmetry is required before checking the Jacobi identity")]
    SkewRequired,
    #[error("lattice bracket has infinite support")]
    InfiniteSupport,
    #[error("zero denominator in rational function")]
    ZeroDenominator,
    #[error("block length {0} must be at least 1")]
    InvalidBlockLength(i64),
    #[error("{0}")]
    Parse(String),
}
