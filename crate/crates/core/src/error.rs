use thiserror::Error;

/// Failure classes shared by every module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Inputs outside the documented parameter ranges.
    #[error("parameter error: {0}")]
    Parameter(String),
    /// Inputs that are valid but leave the domain of a formula or produce non-finite numbers.
    #[error("numerical-domain error: {0}")]
    Domain(String),
    /// Arguments violating a structural precondition of a kernel.
    #[error("contract violation: {0}")]
    Contract(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
