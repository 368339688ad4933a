use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("empty polynomial specification")]
    EmptySpec,
    #[error("malformed token {0:?} in polynomial specification")]
    MalformedToken(String),
    #[error("degree {0} outside the supported range 2..=63")]
    DegreeOutOfRange(u64),
    #[error("polynomial is not primitive: {0}")]
    NotPrimitive(&'static str),
    #[error("discrete logarithm of zero is undefined")]
    LogOfZero,
    #[error("Zech logarithm of {0} is undefined (exponent is a multiple of the group order)")]
    ZechUndefined(u64),
    #[error("predicted memory {predicted} bytes exceeds budget {budget} bytes")]
    MemoryBudgetExceeded { predicted: u128, budget: u128 },
    #[error("zero shift: both halves have the same logarithm")]
    ZeroShift,
    #[error("weight {0} is too small for the selected algorithm")]
    WeightTooSmall(u32),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("instance too large for brute force: {0}")]
    InstanceTooLarge(String),
    #[error("engine cache: {0}")]
    Cache(String),
}
