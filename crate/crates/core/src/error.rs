use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("cannot normalize a zero field")]
    ZeroField,
    #[error("shooting bracket not found: {0}")]
    BracketNotFound(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("landscape violation: {0}")]
    Landscape(String),
    #[error("fiber structure: {0}")]
    Fiber(String),
    #[error("missing critical point: {0}")]
    MissingCriticalPoint(String),
    #[error("iterate left the admissible ball: {0}")]
    EscapedBall(String),
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
