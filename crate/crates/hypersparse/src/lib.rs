//! Spectral sparsification of weighted hypergraphs.
//!
//! The energy of a potential vector `x` on a hypergraph is
//! `Q_H(x) = Σ_e w(e) · max_{u,v ∈ e} (x_u − x_v)²`, and an ε-spectral
//! sparsifier is a reweighted sub-hypergraph whose energy stays within
//! `(1 ± ε) · Q_H(x)` for every `x`. This crate builds such sparsifiers by
//! replacing each hyperedge with a weighted clique whose edges have balanced
//! effective resistances, then importance-sampling hyperedges by the maximum
//! resistance inside their clique.
//!
//! Module map:
//! - [`hypergraph`]: hypergraphs, weighted multigraphs, energy evaluators
//! - [`resistance`]: Laplacian pseudoinverse oracle with rank-one updates
//! - [`potential`]: spanning-tree potential, the balancing progress measure
//! - [`balancing`]: balanced weight-assignment construction and checking
//! - [`sampling`]: the samplers, from single-stage to the full pipeline
//! - [`verify`]: probe/cut/pencil quality checks and brute-force references
//! - [`hmtx`]: the text file format
//! - [`generate`]: seeded instance generators

pub mod balancing;
pub mod error;
pub mod generate;
pub mod hmtx;
pub mod hypergraph;
pub mod potential;
pub mod resistance;
pub(crate) mod rng;
pub mod sampling;
pub mod verify;

pub use error::{Error, Result};
pub use hypergraph::{
    graph_quadratic, hyper_energy, validate, Diagnostics, HyperEdge, Hypergraph, WeightedGraph,
};
pub use resistance::ResistanceOracle;
