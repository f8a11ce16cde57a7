use thiserror::Error;

/// Errors produced by data validation, graph construction, the statistics,
/// and the optimizer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value at row {row}, column {col}")]
    NonFiniteValue { row: usize, col: usize },

    #[error("row {row} has {got} columns, expected {expected}")]
    RaggedRow { row: usize, expected: usize, got: usize },

    #[error("label at position {index} is {value}; labels must be 1 or 2")]
    BadLabel { index: usize, value: u8 },

    #[error("label vector has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("need at least {min} observations, got {got}")]
    TooFewObservations { min: usize, got: usize },

    #[error("k = {k} out of range 1..={max}")]
    InvalidK { k: usize, max: usize },

    #[error("node index {node} out of range for {n_nodes} nodes")]
    NodeOutOfRange { node: usize, n_nodes: usize },

    #[error("cluster sizes m = {m}, n = {n}; both clusters need at least 2 members")]
    DegenerateLabeling { m: usize, n: usize },

    #[error("null variance of {statistic} is not positive at k = {k}; the graph is too regular for this statistic")]
    DegenerateVariance { statistic: &'static str, k: usize },

    #[error("flipping node {node} would shrink a cluster below {min} members")]
    RejectedFlip { node: usize, min: usize },

    #[error("k grid is empty")]
    EmptyGrid,

    #[error("unknown preset `{name}`; available presets: {available}")]
    UnknownPreset { name: String, available: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
