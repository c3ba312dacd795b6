//! Small reverse-mode autodiff toolkit over `ndarray` matrices.
//!
//! Everything is a 2-D array; vectors are 1×n rows or m×1 columns.

pub mod graph;
pub mod optim;
pub mod params;

pub use graph::{softmax_rows, Gradients, Graph, Var};
pub use optim::{clip_global_norm, Adam};
pub use params::{normal, xavier, zeros, ParamError, ParamStore};
