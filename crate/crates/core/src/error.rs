use thiserror::Error;

pub type Result<T> = core::result::Result<T, CoreError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    #[error("shape mismatch: expected {expected} entries, got {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("sigma must be positive and finite")]
    InvalidSigma,
    #[error("invalid action bounds: lower bound must be below upper bound")]
    InvalidBounds,
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("empty candidate set")]
    EmptyCandidates,
    #[error("quantile selects no candidate")]
    QuantileSelectsNone,
}
