use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("degenerate statistics: {0}")]
    DegenerateStatistics(String),
    #[error("covariance is not positive definite")]
    NotPositiveDefinite,
    #[error("state {state} has zero prior but posterior {posterior}")]
    InconsistentPrior { state: usize, posterior: f64 },
    #[error("infeasible alignment: {frames} frames for {states} states")]
    InfeasibleAlignment { frames: usize, states: usize },
    #[error("no valid path through the lattice")]
    NoValidPath,
    #[error("no model for label {0}")]
    MissingModel(String),
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("empty corpus: {0}")]
    EmptyCorpus(String),
}

pub(crate) fn invalid_arg(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
