use thiserror::Error;

pub type Result<T> = std::result::Result<T, BeamformError>;

#[derive(Debug, Error)]
pub enum BeamformError {
    #[error("angle {0}° outside the open interval (0°, 180°)")]
    AngleOutOfRange(f64),

    #[error("invalid array configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("rank {rank} invalid for {m} sensors")]
    InvalidRank { rank: usize, m: usize },

    #[error("initialization failed: {0}")]
    Initialization(String),

    #[error("singular matrix in {0}")]
    Singular(&'static str),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("columns are linearly dependent (column {column})")]
    Degenerate { column: usize },

    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),

    #[error("{0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
