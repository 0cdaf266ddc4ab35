use thiserror::Error;

/// Errors produced by the toolkit.
///
/// Infinite energies are values, not errors: they travel as `f64::INFINITY`.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameters or inconsistent inputs.
    #[error("configuration error: {0}")]
    Config(String),
    /// A numerical precondition does not hold (e.g. a non-positive Jacobian).
    #[error("domain error: {0}")]
    Domain(String),
    /// Broken internal invariant.
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
