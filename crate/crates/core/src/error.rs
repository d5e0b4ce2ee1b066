use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid sector: N = {n_spins}, sz = {sz} ({reason})")]
    InvalidSector {
        n_spins: usize,
        sz: i32,
        reason: &'static str,
    },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("operator does not commute with the reflection: max deviation {deviation:e}")]
    SymmetryViolation { deviation: f64 },

    #[error("degenerate geometry: sites {0} and {1} coincide")]
    DegenerateGeometry(usize, usize),

    #[error("degenerate support: all abscissae are identical")]
    DegenerateSupport,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("selection is empty: {0}")]
    SelectionEmpty(String),

    #[error("smoothing failure: {0}")]
    SmoothingFailure(String),

    #[error("sector dimension {dim} exceeds the configured cap {cap}")]
    Resource { dim: usize, cap: usize },

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
