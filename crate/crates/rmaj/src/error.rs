use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An index or prefix length fell outside the valid range.
    #[error("argument {got} out of range [{lo}, {hi}]")]
    OutOfRange { got: u64, lo: u64, hi: u64 },

    /// Invalid input to a build routine.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// A (level, quadruple, slot) triple does not address a stored component.
    #[error("bad address: {0}")]
    Addressing(String),

    /// A serialized container failed to parse.
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    pub fn addressing(msg: impl Into<String>) -> Self {
        Error::Addressing(msg.into())
    }

    pub(crate) fn check_range(got: u64, lo: u64, hi: u64) -> Result<()> {
        if got < lo || got > hi {
            Err(Error::OutOfRange { got, lo, hi })
        } else {
            Ok(())
        }
    }
}
