use std::fmt;

use thiserror::Error;

/// The run-time errors a sound program may raise. Anything else is a bug.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ErrorKind {
    CastError,
    KeyError,
    AttributeError,
    DynCallError,
}

impl ErrorKind {
    pub const ALL: [ErrorKind; 4] = [
        ErrorKind::CastError,
        ErrorKind::KeyError,
        ErrorKind::AttributeError,
        ErrorKind::DynCallError,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorKind::CastError => "CastError",
            ErrorKind::KeyError => "KeyError",
            ErrorKind::AttributeError => "AttributeError",
            ErrorKind::DynCallError => "DynCallError",
        }
    }

    pub fn parse(s: &str) -> Option<ErrorKind> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind}: {message}")]
pub struct RuntimeError {
    pub kind: ErrorKind,
    pub message: String,
}

impl RuntimeError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        RuntimeError {
            kind,
            message: message.into(),
        }
    }

    pub fn cast(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::CastError, message)
    }

    pub fn key(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::KeyError, message)
    }

    pub fn attribute(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::AttributeError, message)
    }

    pub fn dyn_call(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::DynCallError, message)
    }
}
