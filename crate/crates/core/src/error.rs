use thiserror::Error;

/// Errors produced by the downscaling and forecasting routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty series")]
    EmptySeries,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("insufficient data: need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("test not applicable: {0}")]
    Inapplicable(String),

    #[error("fit failed for {model}: {reason}")]
    FitFailed { model: String, reason: String },

    #[error("model selection failed: no candidate could be fitted ({} attempts)", .0.len())]
    SelectionFailed(Vec<(String, String)>),
}

pub type Result<T> = std::result::Result<T, Error>;
