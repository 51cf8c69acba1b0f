use thiserror::Error;

use crate::structure::Element;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("vocabulary error: {0}")]
    Vocabulary(String),

    #[error("element {element} is outside the universe of size {size}")]
    InvalidSubset { element: Element, size: usize },

    #[error("tuple entry {element} is outside the universe of size {size}")]
    InvalidTuple { element: Element, size: usize },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("P2 class is not 1-adequate: {0}")]
    Adequacy(String),

    #[error("extension rejected: {0}")]
    Extension(String),

    #[error("precondition not met: {0}")]
    Refused(String),

    #[error("not found: {0}")]
    NotFound(String),
}

impl Error {
    pub(crate) fn vocab(msg: impl Into<String>) -> Self {
        Error::Vocabulary(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}
