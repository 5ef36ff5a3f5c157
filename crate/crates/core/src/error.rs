use thiserror::Error;

/// Errors produced by the analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("page {0:?} is not a node of the graph")]
    UnknownNode(String),

    #[error("graph has zero total edge weight; modularity is undefined")]
    ZeroWeight,

    #[error("partitions cover different node sets; symmetric difference: {0:?}")]
    NodeSetMismatch(Vec<String>),

    #[error("design cell ({0}) has no observations")]
    EmptyCell(String),

    #[error("error cross-product matrix is singular")]
    SingularError,

    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
