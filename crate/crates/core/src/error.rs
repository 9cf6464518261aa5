use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("correlation times must be strictly descending (latest first); violated at position {position}")]
    NonDescendingTimes { position: usize },

    #[error("correlation sign string must not be empty")]
    EmptySignString,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("noise model is not Gaussian; phase-pair factors are estimate-only")]
    EstimateOnly,

    #[error("noise schedule covers {covered} shots but the run needs {needed}")]
    ScheduleTooShort { covered: u64, needed: u64 },

    #[error("insufficient records: need at least {needed} cycles per segment, have {available}")]
    InsufficientRecords { needed: usize, available: usize },

    #[error("record pattern mismatch: estimator expects {expected}")]
    PatternMismatch { expected: &'static str },

    #[error("non-physical conditional state at shot {shot}: Bloch radius {radius}")]
    NonPhysicalState { shot: usize, radius: f64 },

    #[error("series too short: need {needed} lags, have {available}")]
    SeriesTooShort { needed: usize, available: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
