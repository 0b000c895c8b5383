use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("series kind mismatch: {op} needs {expected}, got {left} and {right}")]
    KindMismatch {
        op: &'static str,
        expected: &'static str,
        left: &'static str,
        right: &'static str,
    },

    #[error("quadrature did not converge: estimate {estimate:e}, error estimate {error_estimate:e}")]
    Quadrature { estimate: f64, error_estimate: f64 },

    #[error("{quantity} overflows the float range (natural log of value = {log_value})")]
    Overflow { quantity: &'static str, log_value: f64 },

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("missing parameter: {0}")]
    MissingParameter(&'static str),

    #[error("trajectory exceeded the step cap of {0}")]
    StepCap(u64),

    #[error("retaining {requested} samples exceeds the limit of {limit}")]
    MemoryCap { requested: u64, limit: u64 },

    #[error("empty sample")]
    EmptySample,

    #[error("inconsistent results: {0}")]
    Inconsistent(String),

    #[error("regime does not match parameters: {0}")]
    RegimeMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
