use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid evidence: {0}")]
    InvalidEvidence(String),

    #[error("rank {r} out of range for k = {k}, m = {m}")]
    OutOfRange { r: usize, k: usize, m: usize },

    #[error("subset of size {size} is smaller than the test order k = {k}")]
    SubsetTooSmall { size: usize, k: usize },

    #[error("subset of size {size} exceeds the direct enumeration cap of {cap}")]
    SubsetTooLarge { size: usize, cap: usize },

    #[error("brute-force check needs m = {m} <= cap = {cap}")]
    CapExceeded { m: usize, cap: usize },

    #[error("rectangular reduction requires an elementwise-monotone local test")]
    NotMonotone,

    #[error("mode {mode} is not defined for local test {test}")]
    ModeUnsupported { mode: &'static str, test: &'static str },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("rho = {rho} outside [-1/(m-1), 1) for m = {m}")]
    InvalidRho { rho: f64, m: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("empty input")]
    EmptyInput,

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
