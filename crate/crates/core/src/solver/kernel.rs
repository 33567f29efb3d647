//! Kernel of a symmetrized directed Laplacian.
//!
//! `L·Lᵀ x = 0` iff `Lᵀ x = 0`, i.e. `x` is harmonic for the random walk on
//! the graph: at every node with out-edges, `x` equals the weighted average
//! of its out-neighbors. Such functions are spanned by the absorption
//! probabilities into the closed classes of the walk (sink strongly
//! connected components, including nodes without out-edges).

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use nalgebra::DMatrix;
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use super::NullSpace;
use crate::graph::DirectedGraph;

/// Transient components larger than this use a sparse LU factorization.
const DENSE_COMPONENT_LIMIT: usize = 400;

type SparseRow = Vec<(usize, f64)>;

pub fn symmetrized_kernel(g: &DirectedGraph) -> NullSpace {
    let n = g.node_count();
    let mut digraph: DiGraph<(), ()> = DiGraph::with_capacity(n, g.edge_count());
    for _ in 0..n {
        digraph.add_node(());
    }
    for e in g.edges() {
        digraph.add_edge(NodeIndex::new(e.tail), NodeIndex::new(e.head), ());
    }
    let out_weight = g.weighted_out_degrees();

    let mut component = vec![usize::MAX; n];
    // sink components come first
    let sccs = tarjan_scc(&digraph);
    for (c, scc) in sccs.iter().enumerate() {
        for v in scc {
            component[v.index()] = c;
        }
    }

    let mut absorption: Vec<SparseRow> = vec![Vec::new(); n];
    let mut classes = 0usize;
    for (c, scc) in sccs.iter().enumerate() {
        let nodes: Vec<usize> = scc.iter().map(|v| v.index()).collect();
        let leaves = nodes.iter().any(|&u| {
            g.out_edge_range(u)
                .any(|id| component[g.edge(id).head] != c)
        });
        if !leaves {
            for &u in &nodes {
                absorption[u] = vec![(classes, 1.0)];
            }
            classes += 1;
            continue;
        }
        if nodes.len() == 1 {
            let u = nodes[0];
            let row = g.out_edge_range(u).fold(Vec::new(), |acc, id| {
                let e = g.edge(id);
                merge_scaled(&acc, &absorption[e.head], e.weight / out_weight[u])
            });
            absorption[u] = row;
            continue;
        }
        solve_transient(g, &nodes, c, &component, &out_weight, &mut absorption);
    }

    // absorption vectors are independent: each is 1 on its own class and 0 on the others
    let mut columns = vec![Vec::new(); classes];
    for (u, row) in absorption.iter().enumerate() {
        for &(class, p) in row {
            columns[class].push((u, p));
        }
    }
    NullSpace::from_independent_sparse(n, columns)
}

fn merge_scaled(a: &[(usize, f64)], b: &[(usize, f64)], scale: f64) -> SparseRow {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some(&(ka, va)), Some(&(kb, vb))) if ka == kb => {
                out.push((ka, va + scale * vb));
                i += 1;
                j += 1;
            }
            (Some(&(ka, va)), Some(&(kb, _))) if ka < kb => {
                out.push((ka, va));
                i += 1;
            }
            (Some(&(ka, va)), None) => {
                out.push((ka, va));
                i += 1;
            }
            (_, Some(&(kb, vb))) => {
                out.push((kb, scale * vb));
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

/// Solves `(I − P_TT) H_T = P_T,out · H_out` for a transient component.
fn solve_transient(
    g: &DirectedGraph,
    nodes: &[usize],
    c: usize,
    component: &[usize],
    out_weight: &[f64],
    absorption: &mut [SparseRow],
) {
    let m = nodes.len();
    let mut local = std::collections::HashMap::with_capacity(m);
    for (k, &u) in nodes.iter().enumerate() {
        local.insert(u, k);
    }
    let mut rhs: Vec<SparseRow> = vec![Vec::new(); m];
    let mut inner: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
    for (k, &u) in nodes.iter().enumerate() {
        for id in g.out_edge_range(u) {
            let e = g.edge(id);
            let p = e.weight / out_weight[u];
            if component[e.head] == c {
                inner[k].push((local[&e.head], p));
            } else {
                rhs[k] = merge_scaled(&rhs[k], &absorption[e.head], p);
            }
        }
    }
    let mut class_ids: Vec<usize> = rhs.iter().flatten().map(|&(cl, _)| cl).collect();
    class_ids.sort_unstable();
    class_ids.dedup();
    let q = class_ids.len();
    let col = |cl: usize| class_ids.binary_search(&cl).expect("class present");

    let solution = if m <= DENSE_COMPONENT_LIMIT {
        let mut a = DMatrix::<f64>::identity(m, m);
        for (k, row) in inner.iter().enumerate() {
            for &(j, p) in row {
                a[(k, j)] -= p;
            }
        }
        let mut b = DMatrix::<f64>::zeros(m, q);
        for (k, row) in rhs.iter().enumerate() {
            for &(cl, v) in row {
                b[(k, col(cl))] = v;
            }
        }
        let x = a.lu().solve(&b).expect("transient block of a random walk is nonsingular");
        Mat::from_fn(m, q, |i, j| x[(i, j)])
    } else {
        let mut triplets: Vec<Triplet<usize, usize, f64>> = (0..m).map(|k| Triplet::new(k, k, 1.0)).collect();
        for (k, row) in inner.iter().enumerate() {
            triplets.extend(row.iter().map(|&(j, p)| Triplet::new(k, j, -p)));
        }
        let a = SparseColMat::<usize, f64>::try_new_from_triplets(m, m, &triplets)
            .expect("transient block indices are in range");
        let mut b = Mat::<f64>::zeros(m, q);
        for (k, row) in rhs.iter().enumerate() {
            for &(cl, v) in row {
                b[(k, col(cl))] = v;
            }
        }
        let lu = a.sp_lu().expect("transient block of a random walk is nonsingular");
        lu.solve(&b)
    };
    for (k, &u) in nodes.iter().enumerate() {
        absorption[u] = (0..q)
            .filter(|&j| solution[(k, j)] != 0.0)
            .map(|j| (class_ids[j], solution[(k, j)]))
            .collect();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::symmetrized_laplacian;

    fn kernel_dim_dense(g: &DirectedGraph) -> usize {
        let lu = symmetrized_laplacian(g).to_dense();
        let eig = lu.symmetric_eigen();
        let scale = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        eig.eigenvalues.iter().filter(|v| v.abs() < 1e-9 * scale).count()
    }

    fn assert_in_kernel(g: &DirectedGraph, ns: &NullSpace) {
        let lu = symmetrized_laplacian(g);
        for v in ns.basis() {
            let r = lu.mul_vec(v);
            assert!(r.iter().all(|x| x.abs() < 1e-10), "{r:?}");
        }
    }

    #[test]
    fn strongly_connected_graph_has_constant_kernel() {
        let g = DirectedGraph::from_triples(3, &[(0, 1, 1.0), (1, 2, 2.0), (2, 0, 3.0)]).unwrap();
        let ns = symmetrized_kernel(&g);
        assert_eq!(ns.dim(), 1);
        assert_in_kernel(&g, &ns);
    }

    #[test]
    fn sinks_enlarge_the_kernel() {
        // 0 feeds two sinks and a 2-cycle
        let g = DirectedGraph::from_triples(
            5,
            &[(0, 1, 1.0), (0, 2, 2.0), (0, 3, 1.0), (3, 4, 1.0), (4, 3, 1.0)],
        )
        .unwrap();
        let ns = symmetrized_kernel(&g);
        assert_eq!(ns.dim(), 3);
        assert_eq!(ns.dim(), kernel_dim_dense(&g));
        assert_in_kernel(&g, &ns);
    }

    #[test]
    fn transient_cycle_uses_block_solve() {
        let g = DirectedGraph::from_triples(
            5,
            &[(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0), (1, 3, 0.5), (2, 4, 2.0)],
        )
        .unwrap();
        let ns = symmetrized_kernel(&g);
        assert_eq!(ns.dim(), 2);
        assert_eq!(ns.dim(), kernel_dim_dense(&g));
        assert_in_kernel(&g, &ns);
    }

    #[test]
    fn large_transient_component_uses_sparse_factorization() {
        let n = DENSE_COMPONENT_LIMIT + 100;
        let mut t: Vec<(usize, usize, f64)> = (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect();
        t.push((0, n, 0.5));
        t.push((n / 2, n + 1, 0.25));
        let g = DirectedGraph::from_triples(n + 2, &t).unwrap();
        let ns = symmetrized_kernel(&g);
        assert_eq!(ns.dim(), 2);
        assert_in_kernel(&g, &ns);
    }
}
