use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("invalid family: {0}")]
    InvalidFamily(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what} limit exceeded: {requested} > {limit}")]
    LimitExceeded {
        what: &'static str,
        requested: u128,
        limit: u128,
    },

    #[error("enumeration budget exceeded: more than {0} networks")]
    BudgetExceeded(usize),

    #[error("query budget exceeded: more than {0} equivalence queries")]
    QueryBudgetExceeded(usize),

    #[error("not a basic block: {0}")]
    NotABasicBlock(String),

    #[error("block has an empty signature and no name")]
    UnnamedBlock,

    #[error("no candidate accepted for output {output} ({tried} candidates tried)")]
    NoCandidateAccepted { output: usize, tried: usize },

    #[error("inconsistent counts at output {output}: {detail}")]
    InconsistentCounts { output: usize, detail: String },

    #[error("insufficient samples: need {needed}, have {available}")]
    InsufficientSamples { needed: usize, available: usize },

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("empty sample set")]
    EmptySampleSet,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
