use std::path::PathBuf;

use crate::aod::MoveViolation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid array width {0}: must be a positive even number")]
    InvalidDimension(usize),

    #[error("invalid target side {side} for width {width}: must be even with 0 < T <= W")]
    InvalidTarget { side: usize, width: usize },

    #[error("index ({row}, {col}) out of range for side {side}")]
    OutOfRange { row: usize, col: usize, side: usize },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("move is not executable: {}", format_violations(.0))]
    InvalidMove(Vec<MoveViolation>),

    #[error("lowering failed at merged move {index}: {}", format_violations(.violations))]
    Lowering {
        index: usize,
        violations: Vec<MoveViolation>,
    },

    #[error("malformed packet stream: {0}")]
    Codec(String),

    #[error("malformed schedule file at line {line}: {message}")]
    ScheduleParse { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

fn format_violations(violations: &[MoveViolation]) -> String {
    let parts: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
    parts.join("; ")
}
