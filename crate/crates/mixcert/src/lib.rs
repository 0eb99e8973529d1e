//! Random-walk mixing, edge-expansion, long-cycle, and amplification
//! certifiers for regular graphs, with exact-rational and float64 backends.
//!
//! The library computes per-vertex mixing profiles, certifies edge expansion
//! and conductance (exhaustively at small n, by sweep heuristics above),
//! extracts near-spanning expander subgraphs from graphs with enough
//! well-mixing vertices, finds long cycles via deterministic DFS, and runs
//! the well-mixing amplification ladder. Every verdict is recomputed from
//! first principles before it is reported.

pub mod amplify;
pub mod api;
pub mod config;
pub mod construct;
pub mod cycle;
pub mod error;
pub mod expansion;
pub mod graph;
pub mod report;
pub mod scalar;
pub mod spectral;
pub mod walk;

pub use error::{Error, Result};
pub use graph::{ComponentDecomposition, Graph, GraphSummary, VertexSet};
pub use scalar::{Backend, Scalar};
