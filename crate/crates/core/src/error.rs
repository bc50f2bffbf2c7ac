use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: file is empty", path.display())]
    EmptyFile { path: PathBuf },

    #[error("{}: duplicate column names: {}", path.display(), names.join(", "))]
    DuplicateColumns { path: PathBuf, names: Vec<String> },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{}: malformed document: {source}", path.display())]
    Document {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("duplicate dataset id `{0}`")]
    DuplicateDataset(String),

    #[error("unknown dataset id `{0}`")]
    UnknownDataset(String),

    #[error("dataset `{0}` cannot be paired with itself")]
    SelfPair(String),

    #[error("invalid regression weights: {0}")]
    InvalidWeights(String),

    #[error("meta-node `{0}` has no domain tag")]
    UntaggedNode(String),

    #[error("duplicate meta-node `{0}`")]
    DuplicateNode(String),

    #[error("unknown meta-node `{0}`")]
    UnknownNode(String),

    #[error("`{node}` is not a member of collection `{collection}`")]
    NotAMember { node: String, collection: String },

    #[error("collection `{collection}` has {size} members, exact medoid search is limited to {limit}")]
    OversizeCollection {
        collection: String,
        size: usize,
        limit: usize,
    },

    #[error("collection `{0}` is empty")]
    EmptyCollection(String),

    #[error("invalid annealing schedule: {0}")]
    InvalidSchedule(String),

    #[error("unknown export format `{0}`")]
    UnknownFormat(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
