use casimir_core::error::CasimirError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Numerical {
        context: String,
        #[source]
        source: CasimirError,
    },

    #[error("cannot write {path}: {source}")]
    Output {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// Wrap a core error, keeping configuration problems as such.
    pub fn core(context: impl Into<String>, e: CasimirError) -> Self {
        match e {
            CasimirError::Config(msg) => CliError::Config(format!("{}: {msg}", context.into())),
            source => CliError::Numerical { context: context.into(), source },
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical { .. } | CliError::Output { .. } => 3,
        }
    }
}
