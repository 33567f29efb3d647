//! Spectral sparsification of directed graphs.
//!
//! A directed graph `G` is sparsified through its symmetrized Laplacian
//! `L_G · L_Gᵀ`: a spanning-forest seed is grown by the off-subgraph edges
//! whose addition most reduces the dominant generalized eigenvalue of
//! `(L_S L_Sᵀ)⁺ (L_G L_Gᵀ)`.
//!
//! ```
//! use dirspar::{sparsify, DirectedGraph, SparsifyParams};
//!
//! let g = DirectedGraph::from_triples(3, &[(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)]).unwrap();
//! let s = sparsify(&g, &SparsifyParams::default()).unwrap();
//! assert!(s.graph.edge_count() <= g.edge_count());
//! ```

pub mod apps;
pub mod cli;
pub mod error;
pub mod graph;
pub mod io;
pub mod oracle;
pub mod seed;
pub mod sensitivity;
pub mod solver;
pub mod sparse;
pub mod sparsify;
pub mod synthetic;

pub use error::{Error, Result};
pub use graph::{laplacian, symmetrized_laplacian, DirectedGraph, Edge};
pub use sparse::SparseMatrix;
pub use sparsify::{sparsify, ReportRow, Sparsifier, SparsifyParams};
