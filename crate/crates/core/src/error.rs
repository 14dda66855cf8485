use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex id {id} out of range for a graph with {n} vertices")]
    InvalidVertex { id: usize, n: usize },

    #[error("edge ({u}, {v}) has non-positive or non-finite weight {w}")]
    InvalidWeight { u: usize, v: usize, w: f64 },

    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),

    #[error("point set is empty")]
    EmptyPointSet,

    #[error("vertices {from} and {to} lie in different components")]
    Disconnected { from: usize, to: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what}: size {actual} exceeds the cap of {limit}")]
    CapExceeded { what: &'static str, limit: usize, actual: usize },

    #[error("set {0} of the hitting-set instance is empty")]
    EmptySet(usize),

    #[error("fractional solver did not reach the requested accuracy after {iterations} iterations (best feasible value {best_value}, dual bound {dual_bound})")]
    NonConvergence { iterations: usize, best_value: f64, dual_bound: f64 },

    #[error("structure extraction failed: {0}")]
    Extraction(String),

    #[error("internal consistency check failed: {0}")]
    Internal(String),

    #[error("malformed instance: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }
}
