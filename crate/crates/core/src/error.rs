use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("arm {arm} is out of range for an instance with {arms} arms")]
    InvalidArm { arm: usize, arms: usize },

    #[error("invalid bandit instance: {0}")]
    InvalidInstance(String),

    #[error("value outside its domain: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("protocol violation: {0}")]
    Protocol(String),

    #[error("trace integrity: {0}")]
    Integrity(String),
}
