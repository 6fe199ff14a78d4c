use std::path::PathBuf;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("edge list contains no edges")]
    EmptyGraph,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("embedding format error: {0}")]
    EmbeddingFormat(String),

    #[error("node {0} has no embedding")]
    MissingEmbedding(usize),

    #[error("no edge {from} -> {to}")]
    NotAnEdge { from: usize, to: usize },

    #[error("invalid seed set: {0}")]
    InvalidSeedSet(String),

    #[error("exact evaluation refused: {edges} edges exceeds the cap of {cap}")]
    TooManyEdges { edges: usize, cap: usize },

    #[error("{metric} did not converge within {iterations} iterations")]
    NoConvergence { metric: &'static str, iterations: usize },

    #[error("{0} exceeded its wall-clock budget")]
    BudgetExceeded(&'static str),

    #[error("correlation undefined: zero variance")]
    ZeroVariance,

    #[error("unknown bandit arm {0}")]
    UnknownArm(usize),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
