use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid market model: {0}")]
    InvalidMarket(String),

    #[error("node at time {time} has no children: horizon is {horizon}")]
    HorizonExceeded { time: usize, horizon: usize },

    #[error("invalid game spec: {0}")]
    InvalidSpec(String),

    #[error("exit step {step} out of range 0..={max}")]
    ExitStepOutOfRange { step: usize, max: usize },

    #[error("malformed history: {0}")]
    MalformedHistory(String),

    #[error("history {0} is not terminal")]
    NonTerminalHistory(String),

    #[error("enumeration needs N <= {max}, got N = {n}")]
    EnumerationGuard { n: usize, max: usize },

    #[error("closed-form thresholds exist only for N = 2, got N = {0}")]
    UnsupportedClosedForm(usize),

    #[error("strategy profile does not belong to this spec: {0}")]
    UnsolvedSpec(String),

    #[error("invalid sweep grid: {0}")]
    InvalidGrid(String),

    #[error("invalid simulation config: {0}")]
    InvalidSimConfig(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
