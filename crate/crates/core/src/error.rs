use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("response is identically zero")]
    ZeroResponse,

    #[error("degenerate instance: response is orthogonal to every feature (lambda_max = 0)")]
    Degenerate,

    #[error("invalid regularization parameter: {0}")]
    InvalidLambda(String),

    #[error("solution at lambda = {lambda} is not certified (relative gap {gap:e})")]
    Uncertified { lambda: f64, gap: f64 },

    #[error("zero vector: {0}")]
    ZeroVector(&'static str),

    #[error("geometry check failed: {0}")]
    Geometry(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("bad raw-f64 file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
