use std::path::PathBuf;

use sqg_core::SqgError;

/// Line-numbered configuration problems.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: `{key}` repeats the value set on line {first}")]
    Duplicate { line: usize, key: String, first: usize },
    #[error("line {line}: `{key}` expects {expected}, got `{found}`")]
    Type {
        line: usize,
        key: String,
        expected: String,
        found: String,
    },
    #[error("line {line}: `{key}` must be {requirement}, got {value}")]
    Range {
        line: usize,
        key: String,
        requirement: String,
        value: String,
    },
    #[error("line {line} (end of file): missing required key `{key}`")]
    Missing { line: usize, key: String },
}

impl ConfigError {
    pub fn line(&self) -> usize {
        match self {
            Self::Syntax { line, .. }
            | Self::UnknownKey { line, .. }
            | Self::Duplicate { line, .. }
            | Self::Type { line, .. }
            | Self::Range { line, .. }
            | Self::Missing { line, .. } => *line,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DriverError {
    #[error("{}: file not found", .0.display())]
    NotFound(PathBuf),
    #[error("{}: not a snapshot (bad magic bytes)", .0.display())]
    BadMagic(PathBuf),
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Config {
        path: PathBuf,
        #[source]
        source: ConfigError,
    },
    #[error("restart snapshot does not match the configuration: {0}")]
    RestartMismatch(String),
    #[error("modulus breached at t = {t}: worst ratio {worst_ratio}")]
    Breach { t: f64, worst_ratio: f64 },
    #[error("oracle failures: {}", .0.join(", "))]
    OracleFailure(Vec<String>),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] SqgError),
}

impl DriverError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Self::NotFound(path)
        } else {
            Self::Io { path, source }
        }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Core(SqgError::BlowUp { .. }) => 2,
            Self::Breach { .. } => 3,
            Self::NotFound(_) => 10,
            Self::BadMagic(_) => 11,
            Self::Config { .. } | Self::RestartMismatch(_) | Self::Core(SqgError::Config(_)) => 12,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, DriverError>;
