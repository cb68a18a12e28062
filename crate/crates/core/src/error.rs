use thiserror::Error;

/// Errors produced by the geometry, quadrature and product layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate point: vector norm {0:e} is below the normalization threshold")]
    DegeneratePoint(f64),

    #[error("sign-degenerate triple: a pairwise scalar product vanishes")]
    SignDegenerate,

    #[error("singular Jacobian: 1 - det^2 = {0:e}")]
    SingularJacobian(f64),

    #[error("degenerate triangle family: midpoints are (nearly) orthonormal")]
    DegenerateFamily,

    #[error("triple is not standard (domain {0}); vertices are only defined for W000")]
    NotStandard(String),

    #[error("midpoint not unique: vertices {0} and {1} are antipodal")]
    MidpointNotUnique(usize, usize),

    #[error("degenerate triangle: {0}")]
    DegenerateTriangle(&'static str),

    #[error("kernel class mismatch: triple lies in {actual}, kernel expects {expected}")]
    ClassMismatch { expected: String, actual: String },

    #[error("grid not antipodally symmetric: n_azimuth = {0} must be even")]
    GridNotSymmetric(usize),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("length mismatch: expected {expected} values, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("insufficient grid exactness: need degree {required}, grid integrates up to {available}")]
    InsufficientExactness { required: usize, available: usize },

    #[error("parity contract violated: {0}")]
    ParityContract(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
