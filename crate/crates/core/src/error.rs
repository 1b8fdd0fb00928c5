use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("line {line}: {message}")]
    Line { line: usize, message: String },

    #[error("duplicate doc_id {0:?}")]
    DuplicateDocId(String),

    #[error("duplicate query id {0:?}")]
    DuplicateQueryId(String),

    #[error("topics with empty titles after analysis: {}", .0.join(", "))]
    EmptyTopics(Vec<String>),

    #[error("document ordinal {0} out of range")]
    InvalidOrdinal(usize),

    #[error("index holds no tokens")]
    EmptyIndex,

    #[error("index file, field {field}: {message}")]
    IndexFormat {
        field: &'static str,
        message: String,
    },

    #[error("empty query")]
    EmptyQuery,

    #[error("invalid query model: {0}")]
    InvalidQueryModel(String),

    #[error("invalid parameter {name}: {message}")]
    InvalidParameter { name: &'static str, message: String },

    #[error("term {0:?} has no embedding")]
    MissingTerm(String),

    #[error("zero vector")]
    ZeroVector,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("query {0} uncovered by embeddings")]
    UncoveredQuery(String),

    #[error("query {0}: no expandable neighbors")]
    NoCandidates(String),

    #[error("query {0}: no retrievable feedback documents")]
    NoFeedbackDocuments(String),

    #[error("no evaluable queries")]
    NoEvaluableQueries,

    #[error("runs share no query ids")]
    DisjointQuerySets,

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
