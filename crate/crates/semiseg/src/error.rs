//! Error type for file parsing and data generation.

use std::fmt;

/// Errors from the I/O layer. Parse failures carry the 1-based line number
/// of the offending input.
#[derive(Debug)]
pub enum DataError {
    Io(std::io::Error),
    Parse { line: usize, message: String },
    Invalid(String),
    Core(semiseg_core::Error),
}

impl DataError {
    pub fn parse(line: usize, message: impl Into<String>) -> Self {
        DataError::Parse {
            line,
            message: message.into(),
        }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        DataError::Invalid(message.into())
    }
}

impl fmt::Display for DataError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataError::Io(e) => write!(f, "i/o error: {e}"),
            DataError::Parse { line, message } => write!(f, "line {line}: {message}"),
            DataError::Invalid(message) => write!(f, "{message}"),
            DataError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for DataError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            DataError::Io(e) => Some(e),
            DataError::Core(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for DataError {
    fn from(e: std::io::Error) -> Self {
        DataError::Io(e)
    }
}

impl From<semiseg_core::Error> for DataError {
    fn from(e: semiseg_core::Error) -> Self {
        DataError::Core(e)
    }
}
