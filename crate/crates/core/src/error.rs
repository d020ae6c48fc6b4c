use thiserror::Error;

/// Errors shared by every operation in the crate.
///
/// The three variants mirror the way callers are expected to react:
/// `InvalidInput` means the data itself is unusable (bad shapes, NaN,
/// missing classes), `InvalidParameter` means the data is fine but a
/// knob is out of range (`k >= n`, `tau` outside `(0, 1]`, ...), and
/// `NumericalFailure` is reserved for solver breakdowns.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn parameter(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
