use thiserror::Error;

use crate::stats::MessageRecord;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("rank {rank} out of range for {num_procs} processes")]
    RankOutOfRange { rank: usize, num_procs: usize },

    #[error("tuple ({local_proc}, {node}) out of range for {num_nodes} nodes x {ppn} ppn")]
    TupleOutOfRange {
        local_proc: usize,
        node: usize,
        ppn: usize,
        num_nodes: usize,
    },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// A communication pattern or simulated exchange violated one of its
    /// structural guarantees.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Model(#[from] crate::cost::ModelError),

    #[error("cannot price {record:?}: {source}")]
    ModelRecord {
        record: MessageRecord,
        source: crate::cost::ModelError,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }

    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}
