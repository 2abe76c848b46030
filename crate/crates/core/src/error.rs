use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("zero vector has no direction")]
    ZeroVector,

    #[error("state has no amplitudes")]
    EmptyState,

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("operator is not Hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("expectation has imaginary part {imag:e}")]
    ComplexExpectation { imag: f64 },

    #[error("weak value undefined: |<f,s>| = {overlap:e} is numerically zero")]
    OrthogonalSelection { overlap: f64 },

    #[error("postselection probability {probability:e} is numerically zero")]
    EmptyPostselection { probability: f64 },

    #[error("coupling strength must be positive, got {0}")]
    NonPositiveEps(f64),

    #[error("invalid epsilon schedule: {0}")]
    InvalidSchedule(String),

    #[error("meter calibration failed: {0}")]
    Calibration(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("n_trials must be at least 1")]
    NoTrials,
}

pub type Result<T> = std::result::Result<T, Error>;
