use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    Dimension {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("push on full relay buffer (capacity {capacity})")]
    BufferFull { capacity: usize },

    #[error("pop on empty relay buffer")]
    BufferEmpty,

    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    #[error("invalid configuration: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error("no eligible link while undelivered data remains (slot {slot})")]
    Stalled { slot: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
