use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("numerical contract violated: {0}")]
    ContractViolation(String),

    #[error("singular linear system: {0}")]
    SingularSystem(String),

    #[error("system too large for dense Liouvillian solve: {states} states (limit {limit})")]
    SystemTooLarge { states: usize, limit: usize },

    #[error("steady state is not unique: {0}")]
    DegenerateSteadyState(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
