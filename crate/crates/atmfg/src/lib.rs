//! Triangulated maximally filtered graphs from tabular data at scale.
//!
//! The library builds maximal planar correlation graphs (`3N - 6` edges,
//! connected) two ways: an exact quadratic baseline that greedily attaches
//! each node to its best triangular face, and an approximate engine that
//! replaces the dense correlation matrix with a kNN graph, a bounded face
//! universe, a lazy-deletion candidate heap, and nearest-neighbor rescue
//! queries. Synthetic generators (1-factor mixtures, random maximal planar
//! graphs, GMRF sampling) and evaluation metrics round out a benchmark
//! harness; the `atmfg` binary exposes everything as subcommands.

pub mod ann;
pub mod cli;
pub mod dataset;
pub mod engine;
pub mod error;
pub mod exact_tmfg;
pub mod graph;
pub mod metrics;
pub mod synth;
mod util;

pub use dataset::{load_matrix, znormalize, DataMatrix, MatrixFormat};
pub use engine::{build_atmfg, AtmfgConfig, EngineStats, UniverseLimit};
pub use error::{Error, Result};
pub use exact_tmfg::{build_exact_tmfg, face_location_stats, validate_tmfg, ConstructionTrace};
pub use graph::EdgeList;
pub use metrics::{graph_audit, jaccard, weighted_intra_cluster_path, Partition};
pub use util::derive_seed;
