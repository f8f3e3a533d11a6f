use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Bad input: invalid parameters, mismatched contexts, non-invertible operands.
    #[error("domain error: {0}")]
    Domain(String),

    /// `F_{q^n}/F_q` admits no self-dual normal basis.
    #[error("no SDNB exists for q = {q}, n = {n}: requires n odd, or n = 2 mod 4 with q even")]
    NoSdnb { q: u64, n: usize },

    /// The request is well-formed but outside what is implemented (mixed-degree enumeration).
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A postcondition that holds by construction failed. Always a bug.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn internal<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Internal(msg.into()))
}
