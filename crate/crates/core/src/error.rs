use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },

    #[error("edge `{edge}` references unknown node `{node}`")]
    DanglingEndpoint { edge: String, node: String },

    #[error("property key `{key}` is not present in the {role} property index")]
    UnindexedProperty { key: String, role: &'static str },

    #[error("feature vectors have mixed lengths ({expected} vs {found})")]
    MixedVectorLength { expected: usize, found: usize },

    #[error("at least two vectors are needed to estimate LSH parameters, got {0}")]
    NotEnoughSamples(usize),

    #[error("cannot summarize an empty cluster")]
    EmptyCluster,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("schema is not post-processed: {0}")]
    NotPostprocessed(String),

    #[error("evaluation inputs do not cover the same elements: {0}")]
    CoverageMismatch(String),

    #[error("empty sample")]
    EmptySample,

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True when the failure stems from user input (files, flags) rather than
    /// an internal invariant.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::Parse { .. }
                | Error::DuplicateId { .. }
                | Error::DanglingEndpoint { .. }
                | Error::InvalidConfig(_)
                | Error::Json(_)
                | Error::Csv(_)
                | Error::CoverageMismatch(_)
        )
    }
}
