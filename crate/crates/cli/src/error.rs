use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {msg}")]
    Io { path: String, msg: String },
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("unknown benchmark '{0}' (expected ishigami or truss)")]
    UnknownBenchmark(String),
    #[error(transparent)]
    Core(#[from] pceuq::Error),
}

impl CliError {
    pub fn io(path: impl AsRef<std::path::Path>, e: impl std::fmt::Display) -> Self {
        CliError::Io { path: path.as_ref().display().to_string(), msg: e.to_string() }
    }

    /// 2 for bad input or usage, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        use pceuq::Error as E;
        match self {
            CliError::Core(
                E::InvalidInput(_)
                | E::InsufficientData { .. }
                | E::LengthMismatch(..)
                | E::DimensionUnsupported(..)
                | E::DegenerateSample(_)
                | E::MissingCopula
                | E::OutOfRange(_)
                | E::UnsupportedFamily(_),
            ) => 2,
            CliError::Core(_) => 3,
            _ => 2,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
