//! Snapshot files, diagnostics tables and experiment configuration.

mod config;
mod snapshot;
mod table;

pub use config::{load_config, parse_config, ExperimentConfig, InitKind};
pub use snapshot::{decode_snapshot, encode_snapshot, read_snapshot, write_snapshot, Snapshot, FORMAT_VERSION, MAGIC};
pub use table::{format_float, DiagnosticsRow, DiagnosticsTable, FIXED_COLUMNS};

use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("bad magic {found:?} (expected \"TFLM\")")]
    BadMagic { found: Vec<u8> },
    #[error("snapshot format version {0} is not supported (this build reads version 1)")]
    VersionUnsupported(u32),
    #[error("truncated snapshot: expected {expected} bytes, found {actual}")]
    TruncatedPayload { expected: usize, actual: usize },
    #[error("snapshot has {extra} trailing bytes after the payload")]
    TrailingBytes { extra: usize },
    #[error("{path}: {source}")]
    IoFailure { path: PathBuf, source: std::io::Error },
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("unknown config key {0:?}")]
    UnknownKey(String),
    #[error("config key {key}: {constraint}")]
    ConstraintViolation { key: String, constraint: String },
}

impl IoError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        IoError::IoFailure { path: path.into(), source }
    }

    pub(crate) fn constraint(key: &str, constraint: impl Into<String>) -> Self {
        IoError::ConstraintViolation { key: key.to_string(), constraint: constraint.into() }
    }
}
