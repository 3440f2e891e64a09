use thiserror::Error;

/// Failures shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The request exceeds a hard size limit (curve depth, exact counts, curve mass).
    #[error("capacity error: {0}")]
    Capacity(String),

    /// The numerical result cannot be trusted at the requested tolerance.
    #[error("accuracy error: {0}")]
    Accuracy(String),

    /// A user supplied function returned a non-finite sample.
    #[error("non-finite sample {value} at parameter u = {u}")]
    NonFinite { u: f64, value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
