use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("signature mismatch: {0}")]
    Signature(String),

    #[error("arity mismatch: expected {expected}, found {found}")]
    Arity { expected: usize, found: usize },

    #[error("variable x{0} is free but not bound by the assignment")]
    Unbound(usize),

    #[error("resource guard: {what} needs {required}, cap is {cap}")]
    Guard {
        what: String,
        required: u128,
        cap: u128,
    },

    #[error("interpretation: {0}")]
    Interpretation(String),

    #[error("refused: {0}")]
    Refused(String),

    #[error("internal consistency failure: {0}")]
    Internal(String),
}

impl Error {
    pub fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Error::Invalid(message.into())
    }

    pub fn is_guard(&self) -> bool {
        matches!(self, Error::Guard { .. })
    }

    pub fn is_input(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::Invalid(_)
                | Error::Signature(_)
                | Error::Arity { .. }
                | Error::Unbound(_)
        )
    }
}
