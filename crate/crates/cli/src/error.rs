use alphaflow_core::Error as CoreError;
use thiserror::Error;

/// Failure classes with fixed process exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
    #[error("io error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    /// Classify a core error raised while building a model (bad parameters).
    pub fn setup(e: CoreError) -> Self {
        match e {
            CoreError::InvalidGrid { .. }
            | CoreError::InvalidParameter { .. }
            | CoreError::GammaLength { .. }
            | CoreError::NoHarmonicFields
            | CoreError::ComponentOutOfRange { .. }
            | CoreError::TooFewRuns { .. } => CliError::Config(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }

    /// Classify a core error raised while time stepping.
    pub fn runtime(e: CoreError) -> Self {
        match e {
            CoreError::Sink(msg) => CliError::Io(msg),
            CoreError::AtTime { time, source } => match *source {
                CoreError::Sink(msg) => CliError::Io(msg),
                inner => CliError::Runtime(format!("at t = {time:.6}: {inner}")),
            },
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
