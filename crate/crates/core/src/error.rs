use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("invariant violation: {0}")]
    Invariant(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error("perturbation too large: {0}")]
    PerturbationTooLarge(String),
    #[error("set center undefined: barycenter vanishes")]
    UndefinedCenter,
    #[error("ingestion error at line {line}: {msg}")]
    Ingestion { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, SpecError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(SpecError::Domain(msg.into()))
}
