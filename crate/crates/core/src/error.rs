use thiserror::Error;

use crate::graph::NodeId;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),

    #[error("unknown url {0:?}")]
    UnknownUrl(String),

    #[error("graph is empty")]
    EmptyGraph,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("need at least 2 common nodes to compare rankings, found {0}")]
    TooFewCommonNodes(usize),

    #[error("sampling budget exhausted after {attempts} attempts; achieved sizes {achieved:?}")]
    RetryBudgetExhausted { attempts: usize, achieved: Vec<usize> },

    #[error("not enough samples: {0}")]
    NotEnoughSamples(String),

    #[error("malformed input at line {line}: {reason}")]
    Malformed { line: usize, reason: String },

    #[error("graph index out of sync: {0}")]
    Inconsistent(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
