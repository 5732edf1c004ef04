use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A value violates an operation's precondition.
    #[error("invalid {field}: {reason}")]
    InvalidInput { field: &'static str, reason: String },

    /// Messages with different payload lengths were mixed in one round.
    #[error("mixed message lengths in one round: expected B={expected}, got B={found}")]
    MixedBits { expected: u32, found: u32 },

    #[error("device {0} has no registered profile")]
    UnknownDevice(u32),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidInput {
            field,
            reason: reason.into(),
        }
    }
}
