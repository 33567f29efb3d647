//! Initial subgraph: a maximum spanning forest of the symmetrized random-walk
//! transition graph, oriented back onto the directed edges, plus one
//! out-edge for every node that would otherwise lose all of its out-edges.

use crate::graph::{adjacency, DirectedGraph};
use crate::sparse::SparseMatrix;

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns `false` if `a` and `b` were already connected.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

/// Undirected weighted edge with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UndirectedEdge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct SeedSubgraph {
    pub graph: DirectedGraph,
    /// Ids into the original edge list, ascending.
    pub kept_edge_ids: Vec<usize>,
    /// The subset of `kept_edge_ids` added to cover nodes left without out-edges.
    pub added_for_dangling: Vec<usize>,
}

/// Row-normalized `A + Aᵀ`. Isolated nodes get empty rows.
pub fn symmetrized_transition(g: &DirectedGraph) -> SparseMatrix {
    let a = adjacency(g);
    let n = g.node_count();
    let mut triplets: Vec<(usize, usize, f64)> = a.triplets().collect();
    triplets.extend(a.triplets().map(|(i, j, v)| (j, i, v)));
    let a_sym = SparseMatrix::from_triplets(n, n, &triplets);
    let scaled: Vec<_> = (0..n)
        .flat_map(|i| {
            let degree: f64 = a_sym.row_iter(i).map(|(_, v)| v).sum();
            a_sym.row_iter(i).map(move |(j, v)| (i, j, v / degree))
        })
        .collect();
    SparseMatrix::from_triplets(n, n, &scaled)
}

/// Maximum-weight spanning forest (Kruskal) of the undirected graph whose
/// pair weight is `P(i,j) + P(j,i)`.
///
/// Ties are broken by the smaller endpoint pair so the result is deterministic.
pub fn maximum_spanning_structure(p: &SparseMatrix) -> Vec<UndirectedEdge> {
    let n = p.nrows();
    let mut candidates: Vec<UndirectedEdge> = Vec::new();
    for (i, j, v) in p.triplets() {
        if i == j {
            continue;
        }
        let (u, w) = if i < j { (i, j) } else { (j, i) };
        // visit each pair once, from its lower endpoint's row or, when that
        // entry is absent, from the upper one
        if i < j || p.get(j, i) == 0.0 {
            candidates.push(UndirectedEdge {
                u,
                v: w,
                weight: v + p.get(j, i),
            });
        }
    }
    candidates.sort_by(|a, b| {
        b.weight
            .total_cmp(&a.weight)
            .then(a.u.cmp(&b.u))
            .then(a.v.cmp(&b.v))
    });
    let mut forest = UnionFind::new(n);
    candidates
        .into_iter()
        .filter(|e| forest.union(e.u, e.v))
        .collect()
}

/// Builds the initial directed subgraph.
///
/// Every directed edge of `g` whose endpoint pair lies on the spanning forest
/// is kept (both orientations when present). Afterwards each node that has
/// out-edges in `g` but none in the subgraph receives its heaviest out-edge.
pub fn build_seed(g: &DirectedGraph) -> SeedSubgraph {
    let forest = maximum_spanning_structure(&symmetrized_transition(g));
    let mut keep = vec![false; g.edge_count()];
    for e in &forest {
        for (t, h) in [(e.u, e.v), (e.v, e.u)] {
            if let Some(id) = g.find_edge(t, h) {
                keep[id] = true;
            }
        }
    }

    let mut added_for_dangling = Vec::new();
    for node in 0..g.node_count() {
        let range = g.out_edge_range(node);
        if range.is_empty() || range.clone().any(|id| keep[id]) {
            continue;
        }
        // first maximum in (tail, head) order
        let best = range
            .reduce(|best, id| {
                if g.edge(id).weight > g.edge(best).weight {
                    id
                } else {
                    best
                }
            })
            .expect("non-empty range");
        keep[best] = true;
        added_for_dangling.push(best);
    }

    let kept_edge_ids: Vec<usize> = (0..g.edge_count()).filter(|&id| keep[id]).collect();
    SeedSubgraph {
        graph: g.subgraph(&kept_edge_ids),
        kept_edge_ids,
        added_for_dangling,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn union_find_tracks_components() {
        let mut uf = UnionFind::new(4);
        assert!(uf.union(0, 1));
        assert!(uf.union(2, 3));
        assert!(!uf.union(1, 0));
        assert_ne!(uf.find(0), uf.find(2));
        assert!(uf.union(1, 3));
        assert_eq!(uf.find(0), uf.find(2));
    }

    #[test]
    fn transition_examples() {
        let w = 2.0;
        let p = symmetrized_transition(&DirectedGraph::from_triples(2, &[(0, 1, w)]).unwrap());
        assert_eq!(p.get(0, 1), 1.0);
        assert_eq!(p.get(1, 0), 1.0);
        assert_eq!(p.nnz(), 2);

        let g = DirectedGraph::from_triples(3, &[(0, 1, 2.0), (0, 2, 1.0), (1, 2, 3.0)]).unwrap();
        let p = symmetrized_transition(&g);
        assert_eq!(p.get(0, 0), 0.0);
        assert_eq!(p.get(0, 1), 2.0 / 3.0);
        assert_eq!(p.get(0, 2), 1.0 / 3.0);
        for i in 0..3 {
            let s: f64 = p.row_iter(i).map(|(_, v)| v).sum();
            assert!((s - 1.0).abs() < 1e-15);
        }

        let isolated = symmetrized_transition(&DirectedGraph::new(2, []).unwrap());
        assert_eq!(isolated.nnz(), 0);
    }

    #[test]
    fn spanning_structure_examples() {
        let path = SparseMatrix::from_triplets(3, 3, &[(0, 1, 1.0), (1, 2, 1.0)]);
        assert_eq!(maximum_spanning_structure(&path).len(), 2);

        let triangle = SparseMatrix::from_triplets(3, 3, &[(0, 1, 3.0), (1, 2, 2.0), (0, 2, 1.0)]);
        let tree = maximum_spanning_structure(&triangle);
        let mut weights: Vec<f64> = tree.iter().map(|e| e.weight).collect();
        weights.sort_by(f64::total_cmp);
        assert_eq!(weights, vec![2.0, 3.0]);

        let pairs = SparseMatrix::from_triplets(4, 4, &[(0, 1, 1.0), (1, 0, 1.0), (2, 3, 1.0)]);
        let forest = maximum_spanning_structure(&pairs);
        assert_eq!(forest.len(), 2);
        assert_eq!(forest[0].weight, 2.0);
    }

    #[test]
    fn seed_examples() {
        // directed tree rooted at 0
        let tree = DirectedGraph::from_triples(4, &[(0, 1, 1.0), (0, 2, 2.0), (2, 3, 1.0)]).unwrap();
        let seed = build_seed(&tree);
        assert_eq!(seed.graph, tree);
        assert!(seed.added_for_dangling.is_empty());

        let cycle = DirectedGraph::from_undirected(2, &[(0, 1, 1.5)]).unwrap();
        let seed = build_seed(&cycle);
        assert_eq!(seed.kept_edge_ids, vec![0, 1]);

        let star = DirectedGraph::from_triples(
            6,
            &[(0, 1, 1.0), (0, 2, 2.0), (0, 3, 3.0), (0, 4, 4.0), (0, 5, 5.0)],
        )
        .unwrap();
        let seed = build_seed(&star);
        assert_eq!(seed.graph.edge_count(), 5);
        assert!(seed.added_for_dangling.is_empty());
    }

    #[test]
    fn dangling_fix_adds_heaviest_out_edge() {
        // the forest keeps {0,1}, {1,2}, {2,3} but node 3 also points back to 0
        // with a weak edge, while node 2 only has the edge to 0 in g
        let g = DirectedGraph::from_triples(
            4,
            &[
                (0, 1, 10.0),
                (1, 0, 10.0),
                (1, 2, 10.0),
                (2, 3, 1.0),
                (3, 2, 1.0),
                (2, 0, 0.1),
                (3, 0, 0.05),
                (3, 1, 0.2),
            ],
        )
        .unwrap();
        let seed = build_seed(&g);
        let outs = seed.graph.out_degrees();
        for (node, deg) in g.out_degrees().into_iter().enumerate() {
            if deg > 0 {
                assert!(outs[node] > 0, "node {node} lost all out-edges");
            }
        }
        for &id in &seed.kept_edge_ids {
            assert!(seed.graph.find_edge(g.edge(id).tail, g.edge(id).head).is_some());
        }
    }
}
