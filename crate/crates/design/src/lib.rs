//! Applications of a trained route model: greedy generation, hit expansion,
//! genetic optimization, embedding neighbours, evaluation reports and an
//! external docking adapter.

pub mod dock;
pub mod error;
pub mod eval;
pub mod generate;
pub mod neighbors;
pub mod optimize;

pub use dock::{dock, parse_affinity_table, write_pdbqt, DockError, DockResult, DockingJob, PoseScore};
pub use error::DesignError;
pub use eval::{
    pair_similarity, percentile, property_table, random_baseline, render_property_table, similarity_report,
    Aggregate, PropertyTable, SimilarityReport,
};
pub use generate::{seeded_catalog, Designer, Expansion, GenerationConfig};
pub use neighbors::nearest_in_index;
pub use optimize::{FnScorer, GaConfig, Individual, LineageEvent, NegLogP, OptimizeResult, Qed, Scorer};
