use std::fmt;

/// Everything that can go wrong while building distributions or running a scheme.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("alphabet mismatch: expected shape {expected:?}, got {found:?}")]
    AlphabetMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("masses sum to {sum}, not 1")]
    NotNormalized { sum: f64 },

    #[error("mass at index {index} is negative or not finite ({value})")]
    InvalidMass { index: usize, value: f64 },

    #[error("empty alphabet")]
    EmptyAlphabet,

    #[error("support violation: atom {index} has positive mass under P but zero mass under Q")]
    Support { index: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("resource limit exceeded: {atoms} atoms requested, limit is {limit}")]
    Resource { atoms: u128, limit: usize },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse classification used by front ends to pick exit statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Resource,
    Io,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Resource { .. } => ErrorKind::Resource,
            Error::Io(_) => ErrorKind::Io,
            _ => ErrorKind::Validation,
        }
    }

    pub(crate) fn param(msg: impl fmt::Display) -> Self {
        Error::Parameter(msg.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
