//! Error types shared across the crate.

use thiserror::Error;

/// Errors raised while validating or constructing a model.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("dimension must be positive: {0}")]
    EmptyDimension(&'static str),
    #[error("table {table} has wrong shape at index {index}")]
    BadShape { table: &'static str, index: usize },
    #[error("transition row (h={h}, s={s}, a={a}) sums to {sum} (must be 1 within tolerance)")]
    RowSum { h: usize, s: usize, a: usize, sum: String },
    #[error("negative transition probability at (h={h}, s={s}, a={a}, s'={next})")]
    NegativeProbability { h: usize, s: usize, a: usize, next: usize },
    #[error("initial state {got} out of range (num_states={num_states})")]
    InitialStateOutOfRange { got: usize, num_states: usize },
    #[error("non-finite entry in table {0}")]
    NonFinite(&'static str),
    #[error("weights and values must have equal positive length ({weights} vs {values})")]
    LengthMismatch { weights: usize, values: usize },
}

/// Errors raised by the solvers and grid construction.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("exact value space would exceed the cap: {size} > {cap}")]
    CapExceeded { size: usize, cap: usize },
    #[error("relative approximation requires non-negative rewards")]
    NegativeRewards,
    #[error("epsilon must be strictly positive")]
    NonPositiveEpsilon,
    #[error("geometric grid anchor underflows the scalar type")]
    GridUnderflow,
    #[error("value {0} below the additive grid floor")]
    OutOfRange(String),
}

/// Errors raised while evaluating a policy.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("policy has no action for a reachable history at epoch {h}")]
    UndefinedAction { h: usize },
}

/// Errors raised while executing an augmented policy.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExecError {
    #[error("policy has no entry at epoch {h}, state {s}, demand index {demand}")]
    MissingEntry { h: usize, s: usize, demand: usize },
    #[error("initial demand {0} is not in the policy's demand domain")]
    InvalidDemand(String),
    #[error("policy dimensions do not match the instance")]
    DimensionMismatch,
}
