use thiserror::Error;

use crate::speclang::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("series exponential needs a zero constant term in z, found {0}")]
    NonzeroConstantTerm(String),

    #[error("index {n} must exceed the start index {start}")]
    InvalidIndex { n: usize, start: usize },

    #[error("requested range ends at {end}, before the start index {start}")]
    InvalidRange { end: usize, start: usize },

    #[error("invalid recurrence: {0}")]
    InvalidSpec(String),

    #[error("unsupported recurrence shape: {0}")]
    UnsupportedShape(String),

    #[error("unknown family `{0}`")]
    UnknownFamily(String),

    #[error("invalid family parameter: {0}")]
    InvalidParameter(String),

    #[error("enumeration over {size} elements exceeds the limit of {limit}")]
    SizeGuard { size: usize, limit: usize },

    #[error("row {n} is not a distribution: coefficient {value} at k={k} is negative")]
    NegativeCoefficient { n: usize, k: usize, value: String },

    #[error("row {0} has zero total mass")]
    ZeroMass(usize),

    #[error("row {0} has zero variance")]
    ZeroVariance(usize),

    #[error("n={0} is too small: the normalization needs log n > 0")]
    NonPositiveLog(usize),

    #[error("saddle point: {0}")]
    SaddleFailure(String),

    #[error(transparent)]
    Parse(#[from] ParseError),
}
