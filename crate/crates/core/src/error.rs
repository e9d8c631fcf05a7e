use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("both arms must be non-empty (treated = {treated}, control = {control})")]
    DegenerateArm { treated: u64, control: u64 },

    #[error("table sizes differ ({left} vs {right})")]
    SizeMismatch { left: u64, right: u64 },

    #[error("alpha must lie strictly between 0 and 1, got {0}")]
    InvalidLevel(String),

    #[error("exact evaluation requested for n = {n}, above the configured limit of {limit}")]
    ScaleGuard { n: u64, limit: u64 },

    #[error("no potential table was accepted")]
    EmptyAcceptance,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("cannot parse {what}: {input:?}")]
    Parse { what: &'static str, input: String },
}
