use thiserror::Error;

use crate::tree::SyntheticTree;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthesisError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {smiles} duplicates block {first}")]
    DuplicateEntry { line: usize, smiles: String, first: u32 },
    #[error("line {line}: duplicate id {id}")]
    DuplicateId { line: usize, id: u32 },
    #[error("catalog is empty")]
    EmptyCatalog,
    #[error("template set is empty")]
    EmptyTemplates,
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("template {template} expects {expected} reactants, got {got}")]
    ArityMismatch { template: u32, expected: usize, got: usize },
    #[error("template {template} gives no product")]
    NoProduct { template: u32 },
    #[error("template {template} gives no sanitizable product")]
    Sanitize { template: u32 },
    #[error("unknown building block {0}")]
    UnknownBlock(u32),
    #[error("unknown reaction {0}")]
    UnknownReaction(u32),
    #[error("step {step}: replayed {got}, stored {expected}")]
    ReplayMismatch { step: usize, expected: String, got: String },
    #[error("malformed tree: {0}")]
    InvalidTree(String),
    /// No applicable extension within the retry budget; carries the
    /// truncated but valid tree.
    #[error("sampling budget exhausted after {} steps", .partial.steps.len())]
    SamplingExhausted { partial: Box<SyntheticTree> },
}

impl SynthesisError {
    pub(crate) fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        SynthesisError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }
}
