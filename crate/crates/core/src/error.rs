use thiserror::Error;

/// Errors raised by the tracker models, analytics and simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("target MTTF unreachable: {0}")]
    TargetUnreachable(String),

    #[error("schedule/pattern mismatch: {0}")]
    ScheduleMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

pub(crate) fn violation(msg: impl Into<String>) -> Error {
    Error::ContractViolation(msg.into())
}
