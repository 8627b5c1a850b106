use thiserror::Error;

use crate::topology::NodeId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("destination set is empty, nothing to multicast")]
    EmptyDestinations,

    #[error("node {0} is not spanned by the tree")]
    UnknownNode(NodeId),

    #[error("root {0} cannot be a destination")]
    RootIsDestination(NodeId),

    #[error("nodes {0} and {1} are co-located (zero distance)")]
    CoLocated(NodeId, NodeId),

    #[error("malformed graph: {0}")]
    MalformedGraph(String),

    #[error("tree is not pruned to the destination set: leaf {0} is not a destination")]
    NotPruned(NodeId),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("unknown sweep variable `{0}`")]
    UnknownVariable(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
