use thiserror::Error;

pub type Result<T> = std::result::Result<T, FlagError>;

#[derive(Debug, Error)]
pub enum FlagError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not skew-symmetric (asymmetry {0:.3e})")]
    NotSkew(f64),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("element does not lie in m (projection residual {0:.3e})")]
    NotInM(f64),

    #[error("space does not have the SO(2)×SO(n−3) block pattern: {0}")]
    WrongBlockPattern(String),

    #[error("unknown structure '{0}'")]
    UnknownStructure(String),

    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
