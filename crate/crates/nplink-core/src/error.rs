use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed edge-list line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },

    #[error("edge list contains no edges")]
    EmptyInput,

    #[error("timestep {t} exceeds the configured maximum of {max}")]
    TimestepOverflow { t: usize, max: usize },

    #[error("timestep {t} out of range for a sequence of length {len}")]
    TimestepOutOfRange { t: usize, len: usize },

    #[error("node id {id} out of range for {n} nodes")]
    NodeOutOfRange { id: u32, n: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no training datacubes available")]
    NoTrainingData,

    #[error("no evaluable nodes (every node was skipped)")]
    NoEvaluableNodes,

    #[error("bad index file: {0}")]
    IndexFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
