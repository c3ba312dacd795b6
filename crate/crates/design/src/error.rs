use pharmasyn_chem::ChemError;
use pharmasyn_model::ModelError;
use pharmasyn_synthesis::SynthesisError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DesignError {
    #[error("dead end: no block could start or extend the route")]
    DeadEnd,
    #[error("population extinct: no valid individuals remain")]
    ExtinctPopulation,
    #[error("unknown building block {0}")]
    UnknownBlock(u32),
    #[error("step {step}: predicted reaction {reaction} does not apply")]
    Inapplicable { step: usize, reaction: u32 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Synthesis(#[from] SynthesisError),
    #[error(transparent)]
    Chem(#[from] ChemError),
}
