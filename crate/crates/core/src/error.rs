use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),
    #[error("transform is not unitary: max |U'U - I| = {residual:e} exceeds {tolerance:e}")]
    NotUnitary { residual: f64, tolerance: f64 },
    #[error("invalid sampling pattern: {0}")]
    InvalidPattern(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error("precondition violated: {0}")]
    PreconditionViolation(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("reproduction failure:\n{0}")]
    ReproductionFailure(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
