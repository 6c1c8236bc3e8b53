use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("record {index}: invalid annotation {value} (expected 1, -1, \"yes\", \"title\" or \"no\")")]
    InvalidAnnotation { index: usize, value: String },

    #[error("record {index}: feature dimension {found} does not match dataset dimension {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },

    #[error("record {index}: non-finite feature value")]
    NonFiniteFeature { index: usize },

    #[error("record {index}: non-finite score value")]
    NonFiniteScore { index: usize },

    #[error("record {index}: missing score (required by this operation)")]
    MissingScore { index: usize },

    #[error("record {index}: malformed JSON: {message}")]
    MalformedRecord { index: usize, message: String },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("parameter {name} = {value} out of range: {constraint}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    #[error("fold count {k} invalid for {n} examples (need 1 <= k <= n)")]
    InvalidFoldCount { k: usize, n: usize },

    #[error("invalid synthetic task: {0}")]
    InvalidTask(String),

    #[error("invalid rejector: {0}")]
    InvalidRejector(String),

    #[error("rejector expects {expected}-dimensional features, example has {found}")]
    RejectorDimension { expected: usize, found: usize },

    #[error("rejector reads the score field but the example has none")]
    ScoreRequired,

    #[error("{variant} rejector has no trainable parameters")]
    NonTrainable { variant: &'static str },

    #[error("training diverged at epoch {epoch} with learning rate {learning_rate}")]
    Diverged { epoch: usize, learning_rate: f64 },

    #[error("sequence lengths differ: {left} vs {right}")]
    MismatchedLengths { left: usize, right: usize },

    #[error("empty grid")]
    EmptyGrid,

    #[error("curve line {line}: {message}")]
    MalformedCurve { line: usize, message: String },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
