use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{module}: {source}")]
    Core {
        module: &'static str,
        #[source]
        source: spinchaos_core::Error,
    },

    #[error("resource cap: {0}")]
    Memory(String),

    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),

    #[error("json output: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 config, 3 numeric or contract, 4 resource cap, 1 anything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core {
                source: spinchaos_core::Error::Resource { .. },
                ..
            }
            | CliError::Memory(_) => 4,
            CliError::Core { .. } => 3,
            CliError::Io { .. } | CliError::Csv(_) | CliError::Json(_) => 1,
        }
    }
}

/// Tags core errors with the module that raised them.
pub trait Within<T> {
    fn within(self, module: &'static str) -> Result<T, CliError>;
}

impl<T> Within<T> for Result<T, spinchaos_core::Error> {
    fn within(self, module: &'static str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Core { module, source })
    }
}
