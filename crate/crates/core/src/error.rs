use thiserror::Error;

/// Errors raised anywhere in the laboratory.
///
/// The variants map one-to-one onto CLI exit codes (see [`Error::exit_code`]).
#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a documented invariant. `path` locates the offending field.
    #[error("validation error at {path}: {message}")]
    Validation { path: String, message: String },

    /// A configured dimension or enumeration cap would be exceeded.
    #[error("resource cap exceeded: {0}")]
    Resource(String),

    /// The input is well formed but degenerate (empty typical set, zero distribution).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Rate or phase-1 infeasibility that a caller asked to treat as fatal.
    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn resource(message: impl Into<String>) -> Self {
        Error::Resource(message.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation { .. } | Error::Parse { .. } | Error::Degenerate(_) => 2,
            Error::Resource(_) => 3,
            Error::Infeasible(_) => 4,
            Error::Io(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
