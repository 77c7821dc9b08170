//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IbccfError {
    #[error("invalid box: {0}")]
    InvalidBox(String),

    #[error("invalid parameter `{name}`: {why}")]
    InvalidParameter { name: &'static str, why: String },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("regions do not overlap")]
    NoOverlap,

    #[error("region extends beyond the frame and border replication is disabled")]
    OutOfFrame,

    #[error("angle undefined: a filter has zero norm over the common region")]
    UndefinedAngle,

    #[error("numerical failure at iteration {iteration}: {what}")]
    NumericalFailure { iteration: usize, what: String },

    #[error("tracker initialization failed: {0}")]
    InitFailure(String),

    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    #[error("sequence synthesis failed: {0}")]
    SynthFailure(String),
}

pub type Result<T> = std::result::Result<T, IbccfError>;
