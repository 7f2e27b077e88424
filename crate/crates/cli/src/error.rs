use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

/// Process exit codes.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const STATISTICAL_FAIL: i32 = 2;
    pub const IO: i32 = 3;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {field}: {reason}")]
    Invalid { field: String, reason: String },

    #[error("{0}")]
    Usage(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] dklab_core::Error),
}

impl CliError {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Io { .. } => exit::IO,
            Self::Invalid { .. } | Self::Usage(_) | Self::Core(_) => exit::USAGE,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::invalid("alpha", "missing").exit_code(), 1);
        assert_eq!(CliError::Usage("x".into()).exit_code(), 1);
        let io = CliError::io("/nope", std::io::Error::from(std::io::ErrorKind::NotFound));
        assert_eq!(io.exit_code(), 3);
        assert!(io.to_string().starts_with("/nope"));
        assert_eq!(CliError::from(dklab_core::Error::NonIntegerAlpha(1.5)).exit_code(), 1);
    }

    #[test]
    fn invalid_names_the_field() {
        let e = CliError::invalid("alpha", "required but missing");
        assert_eq!(e.to_string(), "invalid configuration: alpha: required but missing");
    }
}
