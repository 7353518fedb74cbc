//! Sessions, their on-disk form, and the operations the CLI and HTTP API drive.

mod checks;
mod session;
mod store;

#[cfg(feature = "server")]
pub mod server;

pub use checks::{CheckKind, CheckReport, Finding};
pub use session::{CreateSession, CryptoEntryInput, Session, SessionConfig, SessionCrypto, SessionMeta};
pub use store::{SessionStore, DEFAULT_HOME, HOME_ENV};

use crate::mapping::MappingError;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

/// One file that failed to load, with the parser's message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileError {
    pub file: String,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("{0} not found")]
    NotFound(String),
    #[error("{message}")]
    BadRequest { message: String, detail: Value },
    #[error("{} input file(s) failed to load", .0.len())]
    Parse(Vec<FileError>),
    #[error("{0}")]
    Precondition(String),
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
    #[error("corrupt session data in {path}: {message}")]
    Corrupt { path: String, message: String },
}

impl ServiceError {
    pub fn bad_request(message: impl Into<String>) -> Self {
        ServiceError::BadRequest {
            message: message.into(),
            detail: Value::Null,
        }
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        ServiceError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }

    /// Machine-readable error code used by the API.
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::NotFound(_) => "not_found",
            ServiceError::BadRequest { .. } => "bad_request",
            ServiceError::Parse(_) => "parse_error",
            ServiceError::Precondition(_) => "precondition_failed",
            ServiceError::Io { .. } => "io_error",
            ServiceError::Corrupt { .. } => "corrupt_session",
        }
    }

    pub fn detail(&self) -> Value {
        match self {
            ServiceError::BadRequest { detail, .. } => detail.clone(),
            ServiceError::Parse(files) => json!({ "files": files }),
            ServiceError::Io { path, .. } | ServiceError::Corrupt { path, .. } => json!({ "path": path }),
            ServiceError::NotFound(what) => json!({ "id": what }),
            ServiceError::Precondition(_) => Value::Null,
        }
    }

    /// `{code, message, detail}` as sent to clients.
    pub fn body(&self) -> Value {
        json!({ "code": self.code(), "message": self.to_string(), "detail": self.detail() })
    }
}

impl From<MappingError> for ServiceError {
    fn from(e: MappingError) -> Self {
        match e {
            MappingError::UnknownEntry(id) => ServiceError::NotFound(format!("mapping entry `{id}`")),
            other => ServiceError::bad_request(other.to_string()),
        }
    }
}
