use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("radius {radius} out of range for plane size {size}")]
    RadiusOutOfRange { radius: usize, size: usize },
    #[error("invalid ring range {r_min}..{r_max} for plane size {size}")]
    InvalidRadii { r_min: usize, r_max: usize, size: usize },
    #[error("{requested} keys requested but capacity is {capacity}")]
    Capacity { requested: u64, capacity: u64 },
    #[error("bit vector has {got} entries, ring mask has {expected} rings")]
    LengthMismatch { expected: usize, got: usize },
    #[error("evidence and reference have different support ({evidence} vs {reference})")]
    SupportMismatch { evidence: usize, reference: usize },
    #[error("key {0} is not part of the key set")]
    UnknownKey(u64),
    #[error("key set is empty")]
    EmptyKeySet,
    #[error("score list is empty")]
    EmptyScores,
    #[error("{got} trials requested, at least {min} required")]
    TooFewTrials { got: usize, min: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid attack `{0}`")]
    Attack(String),
}
