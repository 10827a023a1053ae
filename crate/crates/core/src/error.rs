use thiserror::Error;

/// Errors raised by the numerical layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("sector dimension {dim} exceeds the capacity cap {cap}")]
    Capacity { dim: u128, cap: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("site {site} out of range for a lattice of {sites} sites")]
    SiteOutOfRange { site: usize, sites: usize },

    #[error("operator is not Hermitian (max asymmetry {asymmetry:e})")]
    NonHermitian { asymmetry: f64 },

    #[error("operator must be diagonal in the Fock basis")]
    NonDiagonal,

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("step size underflow at t = {time} (dt = {dt:e})")]
    StepUnderflow { time: f64, dt: f64 },

    #[error("trajectory of sample {sample} failed: {source}")]
    SampleFailed {
        sample: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("coherent state truncation discards weight {weight:e}")]
    Truncation { weight: f64 },

    #[error("invalid time grid: {0}")]
    TimeGrid(String),

    #[error("empty set: {0}")]
    Empty(String),

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),
}

impl Error {
    /// True for errors caused by an oversized Hilbert space or matrix.
    pub fn is_capacity(&self) -> bool {
        matches!(self, Error::Capacity { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
