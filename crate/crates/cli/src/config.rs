use std::path::Path;

use pharmasyn_design::{GaConfig, GenerationConfig};
use pharmasyn_model::TrainConfig;
use pharmasyn_synthesis::DEFAULT_MAX_DEPTH;
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatagenConfig {
    pub max_depth: usize,
}

impl Default for DatagenConfig {
    fn default() -> Self {
        DatagenConfig {
            max_depth: DEFAULT_MAX_DEPTH,
        }
    }
}

/// Settings file; every section is optional and command-line flags win.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub datagen: DatagenConfig,
    pub train: TrainConfig,
    pub generation: GenerationConfig,
    pub ga: GaConfig,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
    }
}
