//! Error type shared by all modules.

use thiserror::Error;

/// Library-wide error type.
///
/// `Domain` marks an argument outside the mathematical domain of an
/// operation, `Precondition` a structurally invalid input (mismatched
/// lengths, missing fields), and `Numeric` a failure of an iterative
/// method to converge to its stated tolerance.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error in {op}: {msg}")]
    Domain { op: &'static str, msg: String },

    #[error("precondition violated in {op}: {msg}")]
    Precondition { op: &'static str, msg: String },

    #[error("numeric failure in {op}: {msg}")]
    Numeric { op: &'static str, msg: String },
}

impl Error {
    pub fn domain(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain { op, msg: msg.into() }
    }

    pub fn precondition(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Precondition { op, msg: msg.into() }
    }

    pub fn numeric(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Numeric { op, msg: msg.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
