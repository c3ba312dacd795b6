//! Building blocks, reaction templates, linear synthetic routes and
//! training-data generation.

pub mod catalog;
pub mod dataset;
pub mod error;
pub mod sample;
pub mod template;
pub mod tree;

pub use catalog::{BuildingBlock, BuildingBlockCatalog, BLOCK_FP_RADIUS};
pub use dataset::{graph_for, make_dataset, read_jsonl, write_jsonl, Dataset, TrainingTriple};
pub use error::SynthesisError;
pub use sample::{sample_tree, sample_tree_lenient, RETRY_BUDGET};
pub use template::{applicable, apply, ReactionTemplate, ReactionTemplateSet, NONE_INDEX};
pub use tree::{apply_step, extend, replay, Order, RouteBuilder, Step, SyntheticTree};

/// Default route depth for the desk setup.
pub const DEFAULT_MAX_DEPTH: usize = 4;
