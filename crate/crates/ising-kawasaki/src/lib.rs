//! Ising and fixed-magnetization Ising measures on bounded-degree graphs,
//! the Glauber / Kawasaki / down-up chains that sample them, and the
//! infinite-tree and annealed random-graph quantities that govern when those
//! chains mix fast or get stuck.
//!
//! Small instances are handled exactly (enumeration, dense transition
//! matrices, eigendecompositions); larger ones by seeded simulation.

pub mod dynamics;
pub mod error;
pub mod graphs;
pub mod ising_measures;
pub mod mean_field;
pub mod metastability;
pub mod spectral_analysis;
pub mod tree_thresholds;
pub mod util;

pub use error::{Error, Result};
pub use graphs::{Graph, UnionGraph};
pub use ising_measures::{IsingParams, PartitionTable, Pinning, SpinConfiguration};
