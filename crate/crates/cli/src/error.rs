use pharmasyn_chem::ChemError;
use pharmasyn_design::{DesignError, DockError};
use pharmasyn_model::ModelError;
use pharmasyn_synthesis::SynthesisError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Dock(#[from] DockError),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    /// 2 for usage errors, 3 when the external docking program is missing or
    /// fails, 1 for anything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Dock(DockError::ExternalToolMissing { .. } | DockError::ToolFailure { .. }) => 3,
            _ => 1,
        }
    }
}

macro_rules! runtime_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Runtime(e.to_string())
            }
        }
    )*};
}

runtime_from!(DesignError, ModelError, SynthesisError, ChemError, std::io::Error, serde_json::Error);
