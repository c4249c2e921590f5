use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("edge #{index} ({v}, {u}) references a node id >= node count {node_count}")]
    NodeOutOfRange {
        index: usize,
        v: u64,
        u: u64,
        node_count: usize,
    },

    #[error("missing file {0}")]
    MissingFile(PathBuf),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("could not sample {requested} negative pairs ({found} found after {attempts} attempts); graph has {nodes} nodes, {edges} edges, density {density:.4}")]
    Sampling {
        requested: usize,
        found: usize,
        attempts: usize,
        nodes: usize,
        edges: usize,
        density: f64,
    },

    #[error("unknown heuristic '{name}'; valid: {valid}")]
    UnknownHeuristic { name: String, valid: String },

    #[error("SimRank on {nodes} nodes needs an n x n matrix ({bytes} bytes), over the limit of {limit} nodes")]
    SimRankTooLarge { nodes: usize, limit: usize, bytes: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("not enough negatives: need at least {needed}, have {have}")]
    TooFewNegatives { needed: usize, have: usize },

    #[error("json error on {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad input data rather than a failure while running.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::NodeOutOfRange { .. }
                | Error::MissingFile(_)
                | Error::Data(_)
                | Error::Json { .. }
                | Error::UnknownHeuristic { .. }
                | Error::Config(_)
                | Error::TooFewNegatives { .. }
        )
    }
}
