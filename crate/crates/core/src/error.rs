use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("input length must be positive")]
    EmptyInput,
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("bad profile token `{token}`: {reason}")]
    ProfileParse { token: String, reason: String },
    #[error("invalid bit character `{0}` (expected 0 or 1)")]
    BadBit(char),
    #[error("{what} = {value} out of range (max {max})")]
    OutOfRange {
        what: &'static str,
        value: usize,
        max: usize,
    },
    #[error("unknown protocol `{0}`")]
    UnknownProtocol(String),
    #[error("schedule violation in `{protocol}`: {reason}")]
    ScheduleViolation {
        protocol: String,
        reason: &'static str,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
