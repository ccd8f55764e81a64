use thiserror::Error;

#[derive(Debug, Error)]
pub enum DreError {
    /// Malformed model parameters (dimension, weights, set arity).
    #[error("invalid model: {0}")]
    InvalidModel(String),
    /// A structural condition required by an operation does not hold.
    #[error("condition not satisfied: {0}")]
    ConditionFailed(String),
    /// Bad operation input (sites outside boxes, mismatched dimensions, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    /// Work or memory beyond the documented caps; callers should shrink the job.
    #[error("resource limit exceeded: {0}")]
    Resource(String),
}

pub type Result<T> = std::result::Result<T, DreError>;
