//! Downstream uses of a sparsifier: PageRank, directed Laplacian solves and
//! spectral partitioning.

pub mod dsolve;
pub mod pagerank;
pub mod partition;

pub use dsolve::{directed_solve, reference_solution, relative_error, smooth_symmetrized, DirectedSolution};
pub use pagerank::{pagerank, pagerank_correlation, pagerank_smooth, pearson, PageRankCorrelation, PageRankResult};
pub use partition::{adjusted_rand_index, kmeans, select_eigvecs, spectral_partition, Clustering, Partitioning};
