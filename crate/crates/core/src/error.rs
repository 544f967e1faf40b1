use thiserror::Error;

/// Everything that can go wrong when building a model or evaluating on it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("n must be at least 1, got {0}")]
    InvalidN(usize),
    #[error("tau must be positive and finite, got {0}")]
    InvalidTau(f64),
    #[error("the octonionic model is 15-dimensional and takes n = 1, got n = {0}")]
    OctonionicN(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not in the algebra (residual {0:e})")]
    NotInAlgebra(f64),
    #[error("vector is not horizontal (vertical part has norm {0:e})")]
    NotHorizontal(f64),
    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("no unique Fano partner for the pair ({0}, {1})")]
    FanoAmbiguous(usize, usize),
    #[error("operation is only defined for the octonionic family")]
    RequiresOctonions,
    #[error("zero vector")]
    ZeroVector,
    #[error("vectors are linearly dependent")]
    Degenerate,
    #[error("tau = 1 is the round sphere; {0}")]
    RoundSphere(&'static str),
    #[error("tau = {tau} is outside the valid range: {reason}")]
    TauOutOfRange { tau: f64, reason: &'static str },
    #[error("subspace is not contained in the maximal sphere (residual {0:e})")]
    NotInSigmaHat(f64),
    #[error("theta must lie in [0, 1], got {0}")]
    InvalidTheta(f64),
    #[error("invalid geodesic parameters: {0}")]
    InvalidGeodesic(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, GeometryError>;
