use thiserror::Error;

/// Errors raised by pulse synthesis, device construction and propagation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("propagation failed: {0}")]
    Propagation(String),

    #[error("synthesis failed: {0}")]
    Synthesis(String),

    #[error("fit did not converge: {0}")]
    Fit(String),

    #[error("regime error: {0}")]
    Regime(String),

    #[error("Hilbert-space dimension {dim} exceeds the cap of {cap}")]
    Capacity { dim: usize, cap: usize },

    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
