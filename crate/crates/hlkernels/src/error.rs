use thiserror::Error;

/// Errors raised by form algebra, geometry, kernel evaluation and the suites.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("frame mismatch")]
    FrameMismatch,
    #[error("form is not homogeneous in the requested variable")]
    NotHomogeneous,
    #[error("invalid multi-index {0:?} for n = {1}")]
    InvalidIndex(Vec<usize>, usize),
    #[error("point outside the model neighborhood")]
    OutsideNeighborhood,
    #[error("pair outside the diagonal radius")]
    OutsideDiagonalRadius,
    #[error("singular frame point: gamma = {0:e}")]
    SingularFramePoint(f64),
    #[error("pole on the diagonal")]
    PoleOnDiagonal,
    #[error("finite-difference step too large for the distance to the diagonal")]
    StepTooLarge,
    #[error("index out of range: {0}")]
    OutOfRange(String),
    #[error("empty quadrature grid")]
    EmptyGrid,
    #[error("point outside the domain")]
    OutsideDomain,
    #[error("too few positive samples for a slope fit: {0}")]
    TooFewSamples(usize),
    #[error("descriptor constraint violated: {0}")]
    Constraint(String),
    #[error("unknown suite: {0}")]
    UnknownSuite(String),
    #[error("unknown kernel: {0}")]
    UnknownKernel(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("expressions are not comparable")]
    NotComparable,
}

pub type Result<T> = std::result::Result<T, Error>;
