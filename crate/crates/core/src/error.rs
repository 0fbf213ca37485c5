use thiserror::Error;

/// Errors raised by parameter validation, the simulation engine and the
/// trace reader.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid model parameters: {0}")]
    InvalidParams(&'static str),

    #[error("invalid message: {0}")]
    InvalidMessage(&'static str),

    #[error("node {node} out of range for {n_nodes} nodes")]
    NodeOutOfRange { node: usize, n_nodes: usize },

    #[error("source and destination must differ (both {0})")]
    SameEndpoints(usize),

    #[error("trajectory has {len} steps, deadline needs {needed}")]
    TrajectoryTooShort { len: usize, needed: usize },

    #[error("enumeration needs L*d = {required} link-steps, budget allows {allowed}")]
    EnumerationTooLarge { required: usize, allowed: usize },

    #[error("invalid count: {0}")]
    InvalidCount(&'static str),

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
