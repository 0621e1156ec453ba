use alloc::string::String;

/// Errors raised by the core crate. All of them are parameter or range
/// violations; nothing here does IO.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("invalid probability {0:?}: expected a decimal strictly between 0 and 1")]
    InvalidProbability(String),
    #[error("vertex count must be between 1 and {max}, got {got}")]
    VertexCount { got: usize, max: usize },
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("graph on {n} vertices exceeds the brute-force limit of {max}")]
    OracleLimit { n: usize, max: usize },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}
