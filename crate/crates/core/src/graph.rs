//! Weighted directed graphs, their Laplacians and the symmetrization
//! `L_Gu = L_G · L_Gᵀ`.
//!
//! The directed Laplacian follows the out-degree convention
//! `L_G = D_G − A_Gᵀ`, so every column sums to zero while row sums only
//! vanish on nodes whose out-degree equals their in-degree. The product
//! `L_G · L_Gᵀ` is symmetric positive semidefinite with the all-ones vector
//! in its kernel; it may carry positive off-diagonal entries, which read as
//! negative undirected edge weights.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

/// A directed edge `tail → head`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    pub weight: f64,
}

impl Edge {
    pub fn new(tail: usize, head: usize, weight: f64) -> Self {
        Self { tail, head, weight }
    }
}

/// Weighted directed graph with 0-based node ids.
///
/// Edges are stored sorted by `(tail, head)`; this order defines edge ids.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedGraph {
    n: usize,
    edges: Vec<Edge>,
}

impl DirectedGraph {
    /// Validates and canonicalizes an edge list. Parallel edges are merged by
    /// summing their weights.
    pub fn new(n: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("node count must be positive".into()));
        }
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for e in edges {
            if e.tail >= n || e.head >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({}, {}) references a node outside 0..{n}",
                    e.tail, e.head
                )));
            }
            if e.tail == e.head {
                return Err(Error::InvalidGraph(format!("self-loop at node {}", e.tail)));
            }
            if !(e.weight.is_finite() && e.weight > 0.0) {
                return Err(Error::InvalidGraph(format!(
                    "edge ({}, {}) has non-positive weight {}",
                    e.tail, e.head, e.weight
                )));
            }
            *merged.entry((e.tail, e.head)).or_insert(0.0) += e.weight;
        }
        let edges = merged
            .into_iter()
            .map(|((tail, head), weight)| Edge { tail, head, weight })
            .collect();
        Ok(Self { n, edges })
    }

    pub fn from_triples(n: usize, triples: &[(usize, usize, f64)]) -> Result<Self> {
        Self::new(n, triples.iter().map(|&(t, h, w)| Edge::new(t, h, w)))
    }

    /// Each undirected edge `{u, v}` becomes the pair `u → v`, `v → u`.
    pub fn from_undirected(n: usize, pairs: &[(usize, usize, f64)]) -> Result<Self> {
        Self::new(
            n,
            pairs
                .iter()
                .flat_map(|&(u, v, w)| [Edge::new(u, v, w), Edge::new(v, u, w)]),
        )
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> Edge {
        self.edges[id]
    }

    /// Id of the edge `tail → head`, if present.
    pub fn find_edge(&self, tail: usize, head: usize) -> Option<usize> {
        self.edges
            .binary_search_by(|e| (e.tail, e.head).cmp(&(tail, head)))
            .ok()
    }

    /// Edge ids leaving `tail`, as a contiguous range.
    pub fn out_edge_range(&self, tail: usize) -> std::ops::Range<usize> {
        let start = self.edges.partition_point(|e| e.tail < tail);
        let end = self.edges.partition_point(|e| e.tail <= tail);
        start..end
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for e in &self.edges {
            deg[e.tail] += 1;
        }
        deg
    }

    pub fn weighted_out_degrees(&self) -> Vec<f64> {
        let mut deg = vec![0.0; self.n];
        for e in &self.edges {
            deg[e.tail] += e.weight;
        }
        deg
    }

    pub fn max_weight(&self) -> f64 {
        self.edges.iter().fold(0.0, |m, e| m.max(e.weight))
    }

    /// Subgraph on the same node set keeping the given edge ids.
    pub fn subgraph(&self, edge_ids: &[usize]) -> DirectedGraph {
        let mut ids = edge_ids.to_vec();
        ids.sort_unstable();
        ids.dedup();
        DirectedGraph {
            n: self.n,
            edges: ids.into_iter().map(|i| self.edges[i]).collect(),
        }
    }

    /// Ids in `self` of every edge of `sub`; `None` if `sub` is not an
    /// edge-subset with identical weights.
    pub fn embed_subgraph(&self, sub: &DirectedGraph) -> Option<Vec<usize>> {
        if sub.n != self.n {
            return None;
        }
        sub.edges
            .iter()
            .map(|e| {
                self.find_edge(e.tail, e.head)
                    .filter(|&id| self.edges[id].weight == e.weight)
            })
            .collect()
    }
}

/// `A(i, j) = w_ij` for every edge `i → j`.
pub fn adjacency(g: &DirectedGraph) -> SparseMatrix {
    let triplets: Vec<_> = g.edges().iter().map(|e| (e.tail, e.head, e.weight)).collect();
    SparseMatrix::from_triplets(g.node_count(), g.node_count(), &triplets)
}

/// Directed Laplacian `L = D − Aᵀ` with `D` the weighted out-degrees.
pub fn laplacian(g: &DirectedGraph) -> SparseMatrix {
    let n = g.node_count();
    let mut triplets = Vec::with_capacity(2 * g.edge_count());
    for e in g.edges() {
        triplets.push((e.tail, e.tail, e.weight));
        triplets.push((e.head, e.tail, -e.weight));
    }
    SparseMatrix::from_triplets(n, n, &triplets)
}

/// Relative magnitude below which a symmetrized entry counts as cancelled.
pub const CANCELLATION_TOL: f64 = 1e-14;

/// `L_u = L · Lᵀ`, computed sparsely.
///
/// Off-diagonal entries with `|v| < 1e-14 · sqrt(L_u(i,i) · L_u(j,j))` are
/// dropped as cancelled couplings; the threshold is symmetric in `(i, j)` so
/// the result stays exactly symmetric.
pub fn symmetrize(l: &SparseMatrix) -> Result<SparseMatrix> {
    if !l.is_square() {
        return Err(Error::NotSquare(l.nrows(), l.ncols()));
    }
    let product = l.matmul(&l.transpose())?;
    let diag = product.diagonal();
    Ok(product.filter(|i, j, v| {
        i == j || v.abs() >= CANCELLATION_TOL * (diag[i] * diag[j]).sqrt()
    }))
}

/// Symmetrized Laplacian of a graph, `L_G · L_Gᵀ`.
pub fn symmetrized_laplacian(g: &DirectedGraph) -> SparseMatrix {
    symmetrize(&laplacian(g)).expect("graph Laplacians are square")
}

/// Factors with `Bᵀ · W · C = L_G`.
#[derive(Debug, Clone)]
pub struct IncidenceFactors {
    /// `m × n`: `+1` at the edge's tail, `−1` at its head.
    pub b: SparseMatrix,
    /// `m × n`: `+1` at the edge's tail.
    pub c: SparseMatrix,
    /// `m × m` diagonal of edge weights.
    pub w: SparseMatrix,
}

impl IncidenceFactors {
    pub fn product(&self) -> SparseMatrix {
        self.b
            .transpose()
            .matmul(&self.w)
            .and_then(|bw| bw.matmul(&self.c))
            .expect("incidence factors have consistent shapes")
    }
}

/// Edge-vertex incidence factorization of the directed Laplacian.
///
/// Signs are anchored at the tail (source) node, which is the orientation
/// under which `Bᵀ W C` reproduces the out-degree Laplacian `D − Aᵀ`.
pub fn incidence_factorization(g: &DirectedGraph) -> IncidenceFactors {
    let m = g.edge_count();
    let n = g.node_count();
    let mut b = Vec::with_capacity(2 * m);
    let mut c = Vec::with_capacity(m);
    let mut w = Vec::with_capacity(m);
    for (i, e) in g.edges().iter().enumerate() {
        b.push((i, e.tail, 1.0));
        b.push((i, e.head, -1.0));
        c.push((i, e.tail, 1.0));
        w.push((i, i, e.weight));
    }
    IncidenceFactors {
        b: SparseMatrix::from_triplets(m, n, &b),
        c: SparseMatrix::from_triplets(m, n, &c),
        w: SparseMatrix::from_triplets(m, m, &w),
    }
}
