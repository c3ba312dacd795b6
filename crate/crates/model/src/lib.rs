//! Pharmacophore-conditioned route model: an E(n)-equivariant encoder, a
//! causal transformer decoder over fingerprint tokens, cosine retrieval of
//! building blocks, a reaction head, training and checkpoints.

pub mod checkpoint;
pub mod config;
pub mod decoder;
pub mod egnn;
pub mod error;
pub mod gradcheck;
pub mod model;
pub mod training;

pub use checkpoint::{verify_checkpoint, Checkpoint, CHECKPOINT_VERSION};
pub use config::{ModelConfig, TrainConfig};
pub use decoder::{
    positional_encoding, predict_reaction, select_block, BlockChoice, RetrievalIndex, Token, TokenSequence,
};
pub use egnn::{EncoderOutput, PackedGraphs, FEATURE_DIM};
pub use error::ModelError;
pub use gradcheck::{gradient_check, rel_err, GradCheckReport};
pub use model::Model;
pub use training::{
    argmax, block_loss, evaluate, route_tokens, rxn_loss, total_loss, train, train_with, write_metrics_csv, Batch,
    EpochMetrics, Example, TrainOutput, METRICS_HEADER,
};

pub(crate) fn num<T: ndarray::NdFloat>(x: f64) -> T {
    T::from(x).expect("representable constant")
}
