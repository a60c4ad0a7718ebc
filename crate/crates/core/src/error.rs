use thiserror::Error;

/// Errors raised by the measure and solver routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(&'static str),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionError { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),

    #[error("numerical failure: {0}")]
    NumericalError(&'static str),

    #[error("decomposition does not reconstruct a distribution (entry {0:.3e})")]
    InconsistentDecomposition(f64),

    #[error("maps are not sufficient statistics (ratio gap {gap:.3e})")]
    InsufficientStatistic { gap: f64 },

    #[error("invalid f-generator: {0}")]
    InvalidGenerator(&'static str),

    #[error("solver did not converge")]
    NotConverged,

    #[error("no feasible grid point")]
    NoFeasiblePoint,
}

pub type Result<T> = core::result::Result<T, Error>;
