use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("node {node} out of range for a graph with {num_nodes} nodes")]
    NodeOutOfRange { node: u64, num_nodes: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(u32),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(u32, u32),
    #[error("graph already contains unlabeled edges; splitting expects a fully labeled graph")]
    UnlabeledInput,
    #[error("need at least {needed} labeled edges, found {found}")]
    TooFewEdges { needed: usize, found: usize },
    #[error("invalid fraction {name} = {value}")]
    InvalidFraction { name: &'static str, value: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("empty batch: {0}")]
    EmptyBatch(&'static str),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("requested dimension {dim} exceeds node count {num_nodes}")]
    DimensionTooLarge { dim: usize, num_nodes: usize },
    #[error("empty input: {0}")]
    Empty(&'static str),
}
