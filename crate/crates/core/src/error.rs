use thiserror::Error;

pub type Result<T> = std::result::Result<T, QspaceError>;

#[derive(Debug, Error)]
pub enum QspaceError {
    #[error("invalid dimension {0}: supported dimensions are 1..=3")]
    Dimension(usize),

    #[error("scale window mismatch at scale {scale}: {reason}")]
    Window { scale: i32, reason: String },

    #[error("cube Q_{{{j},{k:?}}} is not resolvable: {reason}")]
    Unresolvable { j: i32, k: Vec<i64>, reason: String },

    #[error("parameter out of range: {0}")]
    Parameter(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("solver did not converge after {iterations} iterations (best value {best_value:e}): {reason}")]
    NoConvergence {
        iterations: usize,
        best_value: f64,
        reason: String,
    },

    #[error("numeric check failed: {0}")]
    Numeric(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
