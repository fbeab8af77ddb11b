use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what}: n = {n} exceeds the configured cap {cap}{hint}")]
    ResourceLimit {
        what: &'static str,
        n: usize,
        cap: usize,
        hint: &'static str,
    },

    #[error("pattern {0} is not supported by the direct sampler; use enumeration for small n, or the 231 sampler with the initially descending statistic `altdown`, whose law coincides with the 321 class")]
    UnsupportedPattern(String),

    #[error("optimizer saturated at lambda = {lambda}; boundary value {boundary_value}")]
    Saturated { lambda: f64, boundary_value: f64 },

    #[error("growth rate undefined: {0}")]
    UndefinedGrowth(String),

    #[error("internal consistency check failed: {0}")]
    Internal(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
