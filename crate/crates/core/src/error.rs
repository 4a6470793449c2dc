use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A numeric parameter is outside its admissible range.
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: &'static str },

    #[error("invalid problem instance: {0}")]
    Instance(&'static str),

    /// An action is malformed (duplicate item, unknown item, wrong length).
    #[error("invalid action: {0}")]
    InvalidAction(&'static str),

    #[error("operation requires a {expected} instance")]
    KindMismatch { expected: &'static str },

    /// A counter input lies outside `[0, 1]`.
    #[error("value {0} violates the unit sensitivity bound")]
    Sensitivity(f64),

    #[error("counter queried before any insertion")]
    EmptyCounter,

    #[error("counter capacity of {0} insertions exceeded")]
    CounterCapacity(u64),

    #[error("policy configuration: {0}")]
    Config(&'static str),

    #[error("policy state corrupted: {0}")]
    StateCorruption(&'static str),

    #[error("oracle returned an infeasible super arm: {0}")]
    OracleContract(&'static str),
}
