use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("zero-magnitude vector has no direction")]
    ZeroVector,
    #[error("invalid simulated time {0}: must be finite and non-negative")]
    InvalidTime(f64),
}

/// A scenario that cannot be simulated. Detected before any event runs.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("scenario has no nodes")]
    NoNodes,
    #[error("radio_range must be positive and finite, got {0}")]
    RadioRange(f64),
    #[error("horizon must be positive and finite, got {0}")]
    Horizon(f64),
    #[error("node {0} has a non-finite position")]
    NonFinitePosition(u32),
    #[error("nodes {0} and {1} share a position")]
    DuplicatePosition(u32, u32),
    #[error("node ids must be dense from 0; found {found} at index {index}")]
    NodeIds { index: usize, found: u32 },
    #[error("invalid protocol parameter `{field}`: {reason}")]
    Param { field: &'static str, reason: String },
    #[error("invalid stimulus: {0}")]
    Stimulus(String),
    #[error("invalid power profile field `{0}`")]
    Power(&'static str),
    #[error("invalid node generator: {0}")]
    Nodes(String),
}
