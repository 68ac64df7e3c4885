use std::path::PathBuf;

use crate::ontology::{EntityType, RelationType};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("entity label must be non-empty")]
    EmptyLabel,

    #[error("entity label {0:?} contains a tab or newline")]
    InvalidLabel(String),

    #[error("unknown entity id {0}")]
    UnknownEntity(u32),

    #[error("ontology violation: ({source_type}, {relation}, {destination_type}) is not allowed")]
    Conformance {
        source_type: EntityType,
        relation: RelationType,
        destination_type: EntityType,
    },

    #[error("unknown relation tag {0:?}")]
    UnknownRelation(String),

    #[error("unknown entity type tag {0:?}")]
    UnknownEntityType(String),

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("relation {0} cannot be derived by thresholding")]
    NotDerivable(RelationType),

    #[error("no valid negative found for ({0}, {1}, {2}) after {3} attempts")]
    NegativesExhausted(u32, RelationType, u32, usize),

    #[error("AUC needs at least one positive and one negative example")]
    SingleClass,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("incompatible checkpoint: {0}")]
    Incompatible(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{0}")]
    Empty(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

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

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, reason: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            reason: reason.into(),
        }
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numerical(_) => 3,
            Error::Incompatible(_) => 4,
            _ => 2,
        }
    }
}
