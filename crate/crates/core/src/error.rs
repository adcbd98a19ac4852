use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} index {index} out of range (len {len})")]
    Index {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A computation would exceed an explicit budget cap.
    #[error("resource limit: {what} requires {needed} but the cap is {cap}")]
    ResourceLimit {
        what: String,
        needed: u128,
        cap: u64,
    },

    #[error("not applicable: {0}")]
    NotApplicable(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn limit(what: impl Into<String>, needed: u128, cap: u64) -> Self {
        Error::ResourceLimit {
            what: what.into(),
            needed,
            cap,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
