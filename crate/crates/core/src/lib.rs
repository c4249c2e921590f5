//! Link prediction with statistical heuristics, heuristic encoding and
//! GNNs over trainable node embeddings.
//!
//! The crate is organized bottom-up:
//!
//! - [`graph`]: immutable CSR graph, neighbor primitives, negative sampling.
//! - [`io`]: edge lists, dataset splits and feature matrices on disk.
//! - [`heuristics`]: every pair heuristic plus dense reference oracles.
//! - [`encoding`]: heuristic values to embedding indices (integer vocabularies
//!   and float bins) and the concatenated heuristic embedding.
//! - [`nn`]: dense tensors, mean aggregation, MLP, BCE loss, Adam.
//! - [`model`]: the link predictor and its hand-written backward pass.
//! - [`trainer`]: batching, negative sampling, validation and checkpoints.
//! - [`metrics`]: Hits@K, MRR and AUC.
//! - [`synth`]: synthetic graph generators used by tests and benchmarks.
//!
//! Data-parallel loops go through [`par`]; with the `parallel` feature
//! disabled they run sequentially and produce bitwise-identical results.

pub mod checkpoint;
pub mod encoding;
pub mod error;
pub mod graph;
pub mod heuristics;
pub mod io;
pub mod metrics;
pub mod model;
pub mod nn;
pub mod par;
pub mod rng;
pub mod synth;
pub mod trainer;

pub use error::{Error, Result};
pub use graph::{Adjacency, EdgeSet, Graph, NodeId};
pub use heuristics::{HeuristicConfig, HeuristicKind};
