use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed input: {0}")]
    MalformedInput(String),

    #[error("unsupported query: {0}")]
    Unsupported(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("corrupt representation: {0}")]
    CorruptRepresentation(String),

    #[error("parse error{}: {message}", if location.is_empty() { String::new() } else { format!(" at {location}") })]
    Parse { location: String, message: String },

    /// A bench sub-run failed; `row` identifies it.
    #[error("{row} failed: {source}")]
    RunFailed { row: String, source: Box<Error> },
}

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}
