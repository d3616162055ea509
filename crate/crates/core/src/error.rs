//! Error type shared by every module.

use thiserror::Error;

/// Coarse error classes; the CLI maps them to exit codes 2, 3 and 4.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed input or misuse of an operation.
    Validation,
    /// A mathematical hypothesis fails (resonance, singular direction, ...).
    Precondition,
    /// A numerical procedure could not reach its accuracy target.
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("variable mismatch: {0}")]
    VarMismatch(String),
    #[error("unknown variable `{0}`")]
    UnknownVar(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("resonance: b(0) ∈ N* (b(0) = {value}, first resonant order n = {order})")]
    Resonance { order: u64, value: String },
    #[error("degenerate leading coefficient: c(0) = 0")]
    Degenerate,
    #[error("singular direction: {0}")]
    SingularDirection(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("truncation overflow: {what} needs order {required}")]
    TruncationOverflow { what: String, required: usize },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::VarMismatch(_)
            | Error::UnknownVar(_)
            | Error::Invalid(_)
            | Error::Io(_)
            | Error::Json(_) => ErrorKind::Validation,
            Error::Resonance { .. }
            | Error::Degenerate
            | Error::SingularDirection(_)
            | Error::Precondition(_) => ErrorKind::Precondition,
            Error::TruncationOverflow { .. } | Error::Numerical(_) => ErrorKind::Numerical,
        }
    }

    /// Process exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            ErrorKind::Validation => 2,
            ErrorKind::Precondition => 3,
            ErrorKind::Numerical => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
