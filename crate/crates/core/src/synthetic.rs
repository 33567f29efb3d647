//! Seeded random graph generators: small random digraphs for tests and
//! stand-ins shaped like a few public test matrices.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{DirectedGraph, Edge};

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

/// Erdős–Rényi style digraph: each ordered pair is an edge with probability
/// `p`, weights uniform on `[lo, hi)`. A directed cycle through all nodes is
/// added when `cycle` is set, which makes the graph strongly connected.
pub fn random_digraph(n: usize, p: f64, lo: f64, hi: f64, cycle: bool, seed: u64) -> DirectedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.gen_bool(p) {
                edges.push(Edge::new(i, j, rng.gen_range(lo..hi)));
            }
        }
    }
    if cycle && n > 1 {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        for k in 0..n {
            edges.push(Edge::new(order[k], order[(k + 1) % n], rng.gen_range(lo..hi)));
        }
    }
    DirectedGraph::new(n, edges).expect("generated edges are valid")
}

/// Like [`random_digraph`] with small integer weights in `1..=max_weight`.
pub fn random_integer_digraph(n: usize, p: f64, max_weight: u32, seed: u64) -> DirectedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.gen_bool(p) {
                edges.push(Edge::new(i, j, rng.gen_range(1..=max_weight) as f64));
            }
        }
    }
    DirectedGraph::new(n, edges).expect("generated edges are valid")
}

/// Banded nonsymmetric pattern in the spirit of a 115-node Grenoble
/// simulation matrix: about 420 edges within a narrow band, one-sided
/// couplings, weights spread over two decades.
pub fn gre115_like(seed: u64) -> DirectedGraph {
    let n = 115;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = std::collections::BTreeSet::new();
    for i in 0..n {
        pairs.insert((i, (i + 1) % n));
        if rng.gen_bool(0.6) {
            pairs.insert(((i + 1) % n, i));
        }
    }
    while pairs.len() < 421 {
        let i = rng.gen_range(0..n);
        let off = rng.gen_range(2..=12);
        let j = if rng.gen_bool(0.5) { (i + off) % n } else { (i + n - off) % n };
        pairs.insert((i, j));
    }
    let edges = pairs
        .into_iter()
        .map(|(i, j)| Edge::new(i, j, log_uniform(&mut rng, 1e-1, 1e1)));
    DirectedGraph::new(n, edges).expect("generated edges are valid")
}

/// Unit-weight 32-node digraph with about 126 edges and four loosely coupled
/// groups, standing in for a small circuit netlist graph.
pub fn ibm32_like(seed: u64) -> DirectedGraph {
    let n = 32;
    let groups = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let group = |v: usize| v * groups / n;
    let mut pairs = std::collections::BTreeSet::new();
    // a directed ring inside each group keeps it strongly connected
    for g in 0..groups {
        let members: Vec<usize> = (0..n).filter(|&v| group(v) == g).collect();
        for k in 0..members.len() {
            pairs.insert((members[k], members[(k + 1) % members.len()]));
        }
    }
    for g in 0..groups {
        let a = (0..n).find(|&v| group(v) == g).unwrap();
        let b = (0..n).find(|&v| group(v) == (g + 1) % groups).unwrap();
        pairs.insert((a + 1, b + 2));
    }
    while pairs.len() < 126 {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if i == j {
            continue;
        }
        let same = group(i) == group(j);
        if same || rng.gen_bool(0.04) {
            pairs.insert((i, j));
        }
    }
    DirectedGraph::new(n, pairs.into_iter().map(|(i, j)| Edge::new(i, j, 1.0))).expect("generated edges are valid")
}

/// Grid-based nonsymmetric mesh graph with roughly `12k` nodes and `80k`
/// edges, standing in for a desk-scale PDE matrix.
pub fn pesa_like(seed: u64) -> DirectedGraph {
    mesh_like(110, 8_000, seed)
}

/// `side × side` grid with both orientations on grid and one diagonal
/// direction, plus `extra` random local edges; weights log-uniform and
/// independently drawn per orientation.
pub fn mesh_like(side: usize, extra: usize, seed: u64) -> DirectedGraph {
    let n = side * side;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let id = |r: usize, c: usize| r * side + c;
    let mut edges = Vec::new();
    let mut push = |rng: &mut ChaCha8Rng, a: usize, b: usize| {
        edges.push(Edge::new(a, b, log_uniform(rng, 1e-1, 1e1)));
        edges.push(Edge::new(b, a, log_uniform(rng, 1e-1, 1e1)));
    };
    for r in 0..side {
        for c in 0..side {
            if c + 1 < side {
                push(&mut rng, id(r, c), id(r, c + 1));
            }
            if r + 1 < side {
                push(&mut rng, id(r, c), id(r + 1, c));
            }
            if r + 1 < side && c + 1 < side {
                push(&mut rng, id(r, c), id(r + 1, c + 1));
            }
        }
    }
    for _ in 0..extra {
        let r = rng.gen_range(0..side);
        let c = rng.gen_range(0..side);
        let r2 = (r + rng.gen_range(0..3)).min(side - 1);
        let c2 = (c + 2).min(side - 1);
        if (r, c) != (r2, c2) {
            edges.push(Edge::new(id(r, c), id(r2, c2), log_uniform(&mut rng, 1e-1, 1e1)));
        }
    }
    DirectedGraph::new(n, edges).expect("generated edges are valid")
}
