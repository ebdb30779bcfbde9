use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("empty evaluation subset")]
    EmptySubset,

    #[error("unlabeled sample in subset (sample index {0})")]
    UnlabeledSample(usize),

    #[error("budget exceeds candidate pool (budget {budget}, pool {pool})")]
    BudgetExceedsPool { budget: usize, pool: usize },

    #[error("DeepGini requires probability tensor")]
    MissingProbabilities,

    #[error("ground truth required")]
    MissingTruth,

    #[error("undefined correlation (constant ranks)")]
    ConstantRanks,

    #[error("{0}")]
    Infeasible(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: {message}")]
    Dataset { path: PathBuf, message: String },

    #[error("trial failed ({method}, budget {budget}, repetition {repetition}): {source}")]
    Trial {
        method: String,
        budget: usize,
        repetition: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
