use pharmasyn_nn::ParamError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("shape mismatch in {what}: expected {expected}, got {got}")]
    ShapeMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("empty pharmacophore graph")]
    EmptyGraph,
    #[error("zero-norm vector in cosine retrieval")]
    ZeroVector,
    #[error("route not supported by the model: {0}")]
    UnsupportedTree(String),
    #[error("training diverged at epoch {epoch}: loss {loss}")]
    Divergence { epoch: usize, loss: f64 },
    #[error("empty dataset")]
    EmptyDataset,
    #[error("checkpoint checksum mismatch")]
    Checksum,
    #[error("unsupported checkpoint version {found} (expected {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },
    #[error("not a checkpoint file")]
    BadMagic,
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
    #[error("checkpoint was trained on catalog {expected}, got {got}")]
    CatalogMismatch { expected: String, got: String },
    #[error("checkpoint was trained on template set {expected}, got {got}")]
    TemplateMismatch { expected: String, got: String },
    #[error("io: {0}")]
    Io(String),
    #[error(transparent)]
    Param(#[from] ParamError),
}

impl From<std::io::Error> for ModelError {
    fn from(e: std::io::Error) -> Self {
        ModelError::Io(e.to_string())
    }
}
