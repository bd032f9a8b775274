use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("record {index}: {message}")]
    Record { index: usize, message: String },

    #[error("line {line}: {message}")]
    Line { line: usize, message: String },

    #[error("no records")]
    Empty,

    #[error("malformed document: {0}")]
    Document(String),

    #[error("invalid instance {id}: {message}")]
    Instance { id: String, message: String },

    #[error("missing predictions for {} instance(s): {}", .0.len(), .0.join(", "))]
    MissingPredictions(Vec<String>),

    #[error("group {group}: no score for member {member}")]
    MissingMemberScore { group: String, member: String },

    #[error("length mismatch: {predictions} predictions for {golds} golds")]
    LengthMismatch { predictions: usize, golds: usize },

    #[error("duplicate id in batch: {0}")]
    DuplicateId(String),

    #[error("response batch: {0}")]
    Unmatched(String),

    #[error("scorer transport: {0}")]
    Transport(String),

    #[error("scorer returned non-deterministic scores for {0}")]
    NonDeterministic(String),

    #[error("split size {requested} exceeds available pool of {available} (train {train} minus holdout {holdout})")]
    SplitTooLarge {
        requested: usize,
        available: usize,
        train: usize,
        holdout: usize,
    },

    #[error("invalid split manifest: {0}")]
    Manifest(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{0}")]
    Stage(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command line: 2 for scorer failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Transport(_) | Error::NonDeterministic(_) => 2,
            _ => 1,
        }
    }
}
