use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid feature mask: {0}")]
    InvalidMask(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("fusion of an empty score list")]
    EmptyFusion,

    #[error("training error: {0}")]
    Training(String),

    #[error("solver did not converge (worst KKT violation {worst_violation:.3e}): {reason}")]
    Convergence {
        worst_violation: f64,
        reason: String,
    },

    #[error("metric error: {0}")]
    Metric(String),

    #[error("data error: {0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    TomlDe(#[from] toml::de::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
