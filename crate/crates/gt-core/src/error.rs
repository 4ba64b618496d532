use thiserror::Error;

/// Errors produced by the gt-core library.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Two inputs that must agree in shape do not.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A general noise table does not cover the requested defective count.
    #[error("noise table covers N <= {max_covered} but N = {requested} was requested")]
    NoiseTableExceeded {
        requested: usize,
        max_covered: usize,
    },

    /// Bernstein bound requested for a channel with an unbounded
    /// information density (e.g. the noiseless channel). Use the
    /// noiseless-specific concentration bound instead.
    #[error("c_max is infinite; the Bernstein bound is undefined for this channel")]
    InfiniteCMax,

    /// Operation is not defined for the given model.
    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A serialized container is malformed.
    #[error("malformed container: {0}")]
    Format(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn mismatch(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }
}
