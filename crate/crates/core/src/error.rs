use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the bench.
#[derive(Debug, Error)]
pub enum Error {
    #[error("text has no tokens after normalization")]
    EmptyText,

    #[error("question has {0} tokens; length bins stop at 25")]
    Overflow(usize),

    #[error("malformed template at line {line} ({template}): {reason}")]
    MalformedTemplate {
        template: String,
        line: usize,
        reason: String,
    },

    #[error("duplicate question: {0}")]
    DuplicateQuestion(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("degenerate contingency table: {0}")]
    DegenerateTable(String),

    #[error("format error at line {line}: {reason}")]
    Format { line: usize, reason: String },

    #[error("every token of {0:?} is out of vocabulary")]
    AllOov(String),

    #[error("embedding dimension must be positive")]
    InvalidDimension,

    #[error("cosine of a zero-norm vector is undefined")]
    ZeroVector,

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("duplicate id: {0}")]
    DuplicateId(String),

    #[error("internal invariant violated: {0}")]
    InternalInvariant(String),

    #[error("infeasible split: {0}")]
    InfeasibleSplit(String),

    #[error("training labels contain a single category")]
    DegenerateLabels,

    #[error("training diverged: {0}")]
    DivergedTraining(String),

    #[error("empty split or score list")]
    EmptySplit,

    #[error("no embedding for question {id} in representation {source_name}")]
    MissingEmbedding { id: String, source_name: String },

    #[error("value {value} for question {question} lies outside its scale")]
    ScaleViolation { question: String, value: f64 },

    #[error("bad input: {0}")]
    BadInput(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("prediction or observation vector is constant")]
    ConstantPrediction,

    #[error("triad {triad} is incomplete for template {template}")]
    IncompleteTriad { triad: String, template: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Config(_) => 2,
            Error::InfeasibleSplit(_) => 4,
            _ => 3,
        }
    }
}
