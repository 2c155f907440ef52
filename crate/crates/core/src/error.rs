use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation (bad index,
    /// point outside the reference element, zero point count, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The element mapping is degenerate or inverted somewhere it is needed.
    #[error("geometry error: {message} at (a, b, c) = ({a}, {b}, {c})")]
    Geometry { message: String, a: f64, b: f64, c: f64 },

    /// Malformed input document.
    #[error("parse error: {0}")]
    Parse(String),

    /// Inconsistent arguments (dimension mismatch, non-symmetric input, ...).
    #[error("usage error: {0}")]
    Usage(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }
}
