use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {op}: {lhs:?} vs {rhs:?}")]
    ShapeMismatch {
        op: &'static str,
        lhs: (usize, usize),
        rhs: (usize, usize),
    },
    #[error("{op} domain error: argument {value} is not allowed")]
    Domain { op: &'static str, value: f64 },
    #[error("invalid reduction axis {0} (expected 0 or 1)")]
    InvalidAxis(usize),
    #[error("backward requires a 1x1 loss, got {0:?}")]
    NonScalarLoss((usize, usize)),
    #[error("tape has already been consumed by a backward pass")]
    TapeConsumed,
    #[error("empty tape")]
    EmptyTape,
    #[error("invalid sparse matrix: {0}")]
    InvalidSparse(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("snapshot {snapshot} has {edges} edges; at least {required} are needed for splitting")]
    TooFewEdges {
        snapshot: usize,
        edges: usize,
        required: usize,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("training diverged at epoch {epoch}: non-finite loss")]
    Divergence { epoch: usize },
    #[error("non-finite gradient for parameter {0}")]
    NonFiniteGradient(String),
    #[error("metric needs both positive and negative labels")]
    SingleClass,
    #[error("metric needs at least one positive label")]
    NoPositives,
    #[error("model has not been trained")]
    Untrained,
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
