use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid space: {0}")]
    InvalidSpace(String),
    #[error("point index {index} out of range for a space of {n} points")]
    InvalidIndex { index: usize, n: usize },
    #[error("open ball of radius {radius} around the base carries no mass")]
    ZeroMass { radius: f64 },
    #[error("invalid correspondence: {0}")]
    InvalidCorrespondence(String),
    #[error("subset is empty")]
    EmptySubset,
    #[error("size guard: {what} ({got} exceeds {limit})")]
    SizeGuard { what: &'static str, got: u64, limit: u64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("neighbour map has an empty side")]
    EmptySide,
    #[error("pair doubling exhausted after {levels} levels")]
    DoublingExhausted { levels: usize },
    #[error("operation needs a space built by make_s")]
    WrongSpaceKind,
    #[error("resolution floor reached at scale {scale}")]
    ResolutionFloor { scale: f64 },
    #[error("hypothesis unmet: {0}")]
    HypothesisUnmet(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
