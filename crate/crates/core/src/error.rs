use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("value out of range: {0}")]
    Range(String),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("read voltage {v_read} V disturbs the cell (|v| must stay below {threshold} V)")]
    ReadDisturb { v_read: f64, threshold: f64 },

    #[error("program-and-verify did not reach level {level} within {pulses} pulses")]
    Programming { level: u8, pulses: usize },

    #[error("invalid clock schedule: {0}")]
    Schedule(String),

    #[error("unknown component `{0}`")]
    UnknownComponent(String),

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error("unsupported weight file version {found} (this build reads version {expected})")]
    UnsupportedVersion { found: u32, expected: u32 },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Coarse failure class, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Argument,
    Io,
    Numeric,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Argument(_)
            | Error::Range(_)
            | Error::ReadDisturb { .. }
            | Error::Schedule(_)
            | Error::UnknownComponent(_) => ErrorClass::Argument,
            Error::Io { .. } | Error::Parse { .. } | Error::UnsupportedVersion { .. } => {
                ErrorClass::Io
            }
            Error::Calibration(_) | Error::Programming { .. } => ErrorClass::Numeric,
        }
    }

    pub(crate) fn parse(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
