use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty graph")]
    EmptyGraph,
    #[error("disconnected: restrict to giant component")]
    Disconnected,
    #[error("node {0} out of range")]
    NodeOutOfRange(usize),
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("negative susceptibility {value} at node {node}")]
    NegativeSusceptibility { node: usize, value: f64 },
    #[error("negative transmissibility {value} at node {node}")]
    NegativeTransmissibility { node: usize, value: f64 },
    #[error("negative infection rate {value} at node {node}")]
    NegativeRate { node: usize, value: f64 },
    #[error("zero distance in kernel between nodes {0} and {1}")]
    ZeroDistance(usize, usize),
    #[error("invalid event log: {0}")]
    InvalidEventLog(String),
    #[error("no motifs found")]
    NoMotifs,
    #[error("graph too large for brute-force census: {0} nodes (limit {1})")]
    GraphTooLarge(usize, usize),
    #[error("wrong node count: expected {expected}, got {got}")]
    WrongNodeCount { expected: usize, got: usize },
    #[error("no variation: all observations identical")]
    NoVariation,
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("no in-support initial state found after {0} prior draws")]
    NoValidInit(usize),
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: u64,
        msg: String,
    },
    #[error("unknown node label {0:?}")]
    UnknownLabel(String),
    #[error("duplicate node label {0:?}")]
    DuplicateLabel(String),
    #[error("missing coordinates for node {0:?}")]
    MissingCoordinates(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
