use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid MBTI code {0:?}: expected one of the 16 four-letter codes such as \"intp\"")]
    InvalidMbtiCode(String),

    #[error("invalid rating {value:?}{}: ratings are integers in 0..=6", location(.row, .column))]
    InvalidRating {
        value: String,
        row: Option<usize>,
        column: Option<String>,
    },

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("duplicate respondent id {0:?}")]
    DuplicateRespondent(String),

    #[error("invalid respondent id {0:?}: ids must be non-empty and use only [A-Za-z0-9_-]")]
    InvalidRespondentId(String),

    #[error("invalid catalog: {0}")]
    InvalidCatalog(String),

    #[error("frequency table is empty (total count 0)")]
    EmptyTable,

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("too few points: k = {k} but only {n} rows")]
    TooFewPoints { k: usize, n: usize },

    #[error("label length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("too few samples: need at least {needed}, found {found}")]
    TooFewSamples { needed: usize, found: usize },

    #[error("silhouette needs at least 2 distinct clusters")]
    SingleClusterOnly,

    #[error("unknown genre {0:?}")]
    UnknownGenre(String),

    #[error("unknown category {0:?}")]
    UnknownCategory(String),

    #[error("unknown personality type {0}")]
    UnknownType(String),

    #[error("unknown respondent {0:?}")]
    UnknownRespondent(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

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

fn location(row: &Option<usize>, column: &Option<String>) -> String {
    match (row, column) {
        (Some(r), Some(c)) => format!(" at row {r}, column {c:?}"),
        (Some(r), None) => format!(" at row {r}"),
        (None, Some(c)) => format!(" in column {c:?}"),
        (None, None) => String::new(),
    }
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
