//! Approximate dominant generalized eigenvectors of `(L_Su⁺ L_Gu)` and the
//! first-order spectral sensitivity of every off-subgraph edge.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::solver::SpsSolver;
use crate::sparse::{dot, norm2, SparseMatrix};

pub const DEFAULT_STEPS: usize = 3;
pub const DEFAULT_EPSILON: f64 = 0.9;
pub const DEFAULT_D_OUT: usize = 10;

/// Number of random starts for an `n`-node graph: `ceil(log2 n)` in `[4, 16]`.
pub fn default_starts(n: usize) -> usize {
    let log = (n.max(2) as f64).log2().ceil() as usize;
    log.clamp(4, 16)
}

#[derive(Debug, Clone)]
pub struct EigPair {
    /// Rayleigh quotient `hᵀL_Gu h / hᵀL_Su h`.
    pub mu: f64,
    /// Scaled so that `hᵀL_Su h = 1` (zero if the iteration collapsed).
    pub h: Vec<f64>,
    pub t: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeScore {
    pub edge_id: usize,
    pub sensitivity: f64,
    pub embedding: Vec<f64>,
}

/// `L·Lᵀ·x` without forming the product.
pub fn apply_symmetrized(l: &SparseMatrix, x: &[f64]) -> Vec<f64> {
    l.mul_vec(&l.tr_mul_vec(x))
}

/// `t` steps of `h ← L_Su⁺ (L_G L_Gᵀ) h` starting from `h0`.
///
/// `l_g` is the directed Laplacian of the full graph and `solver` wraps the
/// symmetrized Laplacian of the subgraph together with its kernel.
pub fn power_iterate(l_g: &SparseMatrix, solver: &SpsSolver, h0: &[f64], t: usize) -> Result<EigPair> {
    let n = solver.matrix().nrows();
    if h0.len() != n || l_g.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: if h0.len() != n { h0.len() } else { l_g.nrows() },
        });
    }
    if t == 0 {
        return Err(Error::InvalidParameter("power iteration needs t >= 1".into()));
    }
    let mut h = h0.to_vec();
    solver.nullspace().project(&mut h);
    for _ in 0..t {
        let y = apply_symmetrized(l_g, &h);
        // Inner solves are not required to converge: symmetrized subgraph
        // Laplacians square the condition number, and any h off the kernel
        // still yields a valid lower bound on μ_max below.
        let (next, stats) = solver.solve(&y)?;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NotConverged {
                iterations: stats.iterations,
                residual: stats.residual,
            });
        }
        if !stats.converged {
            log::trace!("inner solve stopped at residual {:.2e}", stats.residual);
        }
        h = next;
        // keep magnitudes in range; the quotient is scale invariant
        let scale = norm2(&h);
        if scale == 0.0 {
            break;
        }
        h.iter_mut().for_each(|v| *v /= scale);
    }
    let gq = norm2(&l_g.tr_mul_vec(&h)).powi(2);
    let sq = dot(&h, &solver.matrix().mul_vec(&h));
    if !(sq > 0.0) {
        return Ok(EigPair {
            mu: 0.0,
            h: vec![0.0; n],
            t,
        });
    }
    let s = sq.sqrt();
    h.iter_mut().for_each(|v| *v /= s);
    Ok(EigPair { mu: gq / sq, h, t })
}

/// Uniform entries on `[-1, 1]`, shifted to zero mean.
pub fn random_start<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut h: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    crate::sparse::deflate_mean(&mut h);
    h
}

/// Power iteration from `r` independent random starts. Starts are drawn
/// sequentially from `rng`; the iterations themselves run in parallel.
pub fn dominant_vectors<R: Rng + ?Sized>(
    l_g: &SparseMatrix,
    solver: &SpsSolver,
    r: usize,
    t: usize,
    rng: &mut R,
) -> Result<Vec<EigPair>> {
    if r == 0 {
        return Err(Error::InvalidParameter("at least one start vector is required".into()));
    }
    let n = solver.matrix().nrows();
    let starts: Vec<Vec<f64>> = (0..r).map(|_| random_start(n, rng)).collect();
    starts
        .par_iter()
        .map(|h0| power_iterate(l_g, solver, h0, t))
        .collect()
}

/// Largest Rayleigh quotient among the pairs; each one is a lower bound on `μ_max`.
pub fn mu_estimate(pairs: &[EigPair]) -> f64 {
    pairs.iter().map(|p| p.mu).fold(0.0, f64::max)
}

/// `Σ_k w_{p,k} (h_p − h_k)` over the out-edges `(p,k)` of `s`, i.e. `(L_Sᵀ h)_p`.
fn tail_flux(s: &DirectedGraph, h: &[f64], p: usize) -> f64 {
    s.out_edge_range(p)
        .map(|id| {
            let e = s.edge(id);
            e.weight * (h[p] - h[e.head])
        })
        .sum()
}

/// First-order change of `hᵀ L_Su h` when edge `(p, q)` of weight `w` is
/// added to `s`: `2w (h_p − h_q) (L_Sᵀ h)_p`.
pub fn edge_sensitivity(h: &[f64], s: &DirectedGraph, p: usize, q: usize, w: f64) -> Result<f64> {
    if s.find_edge(p, q).is_some() {
        return Err(Error::EdgeInSubgraph(p, q));
    }
    Ok(2.0 * w * (h[p] - h[q]) * tail_flux(s, h, p))
}

/// Embedding of `(p, q)`: one entry `Σ_k w_{p,q_k} hᵀ(e_{pq} e_{pq_k}ᵀ + e_{pq_k} e_{pqᵀ}) h`
/// per vector in `hs`, summed over the subgraph edges `(p, q_k)` leaving `p`.
pub fn edge_embedding(hs: &[Vec<f64>], s: &DirectedGraph, p: usize, q: usize) -> Result<Vec<f64>> {
    if s.find_edge(p, q).is_some() {
        return Err(Error::EdgeInSubgraph(p, q));
    }
    Ok(hs
        .iter()
        .map(|h| 2.0 * (h[p] - h[q]) * tail_flux(s, h, p))
        .collect())
}

/// Scores each candidate edge of `g` against subgraph `s`.
///
/// The sensitivity is the mean over `hs` of the per-vector sensitivities.
/// Output order follows `candidates`.
pub fn score_edges(g: &DirectedGraph, s: &DirectedGraph, candidates: &[usize], hs: &[Vec<f64>]) -> Result<Vec<EdgeScore>> {
    if hs.is_empty() {
        return Err(Error::InvalidParameter("no eigenvector estimates supplied".into()));
    }
    // (L_Sᵀ h) for every h, computed once
    let flux: Vec<Vec<f64>> = hs
        .iter()
        .map(|h| (0..s.node_count()).map(|p| tail_flux(s, h, p)).collect())
        .collect();
    candidates
        .par_iter()
        .map(|&id| {
            let e = g.edge(id);
            if s.find_edge(e.tail, e.head).is_some() {
                return Err(Error::EdgeInSubgraph(e.tail, e.head));
            }
            let embedding: Vec<f64> = hs
                .iter()
                .zip(&flux)
                .map(|(h, f)| 2.0 * (h[e.tail] - h[e.head]) * f[e.tail])
                .collect();
            let sensitivity = e.weight * embedding.iter().sum::<f64>() / hs.len() as f64;
            Ok(EdgeScore {
                edge_id: id,
                sensitivity,
                embedding,
            })
        })
        .collect()
}

/// `1 − ‖s1 − s2‖ / max(‖s1‖, ‖s2‖)`; two zero vectors count as identical.
pub fn spectral_similarity(s1: &[f64], s2: &[f64]) -> f64 {
    assert_eq!(s1.len(), s2.len(), "embeddings of different length");
    let scale = norm2(s1).max(norm2(s2));
    if scale == 0.0 {
        return 1.0;
    }
    let diff: f64 = s1.iter().zip(s2).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    1.0 - diff / scale
}

/// Greedy redundancy filter over candidates sorted by decreasing sensitivity.
///
/// Edges whose tail already has `d_out` or more out-edges (per `out_degree`)
/// are dropped first. Of the rest, the first is kept and each later edge is
/// kept only if its similarity to every kept edge is below `epsilon`.
pub fn filter_similar_edges(
    candidates: &[EdgeScore],
    g: &DirectedGraph,
    out_degree: &[usize],
    epsilon: f64,
    d_out: usize,
) -> Vec<EdgeScore> {
    let mut kept: Vec<EdgeScore> = Vec::new();
    for c in candidates {
        if out_degree[g.edge(c.edge_id).tail] >= d_out {
            continue;
        }
        if kept
            .iter()
            .all(|k| spectral_similarity(&c.embedding, &k.embedding) < epsilon)
        {
            kept.push(c.clone());
        }
    }
    kept
}

/// Sorts by decreasing sensitivity, ties by edge id.
pub fn sort_by_sensitivity(scores: &mut [EdgeScore]) {
    scores.sort_by(|a, b| {
        b.sensitivity
            .total_cmp(&a.sensitivity)
            .then(a.edge_id.cmp(&b.edge_id))
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{laplacian, symmetrized_laplacian};
    use crate::solver::SolverParams;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn score(id: usize, emb: &[f64]) -> EdgeScore {
        EdgeScore {
            edge_id: id,
            sensitivity: 1.0,
            embedding: emb.to_vec(),
        }
    }

    #[test]
    fn default_start_count_is_clamped() {
        assert_eq!(default_starts(2), 4);
        assert_eq!(default_starts(115), 7);
        assert_eq!(default_starts(1 << 20), 16);
    }

    #[test]
    fn identical_subgraph_gives_unit_quotient() {
        let g = DirectedGraph::from_triples(
            4,
            &[(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.0), (3, 0, 0.5), (1, 3, 1.0)],
        )
        .unwrap();
        let solver = SpsSolver::for_graph(&g, SolverParams::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let h0 = random_start(4, &mut rng);
            let pair = power_iterate(&laplacian(&g), &solver, &h0, 3).unwrap();
            assert!((pair.mu - 1.0).abs() < 1e-6, "{}", pair.mu);
        }
    }

    #[test]
    fn sensitivity_of_constant_vector_is_zero() {
        let s = DirectedGraph::from_triples(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert_eq!(edge_sensitivity(&[1.0; 3], &s, 0, 2, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn sensitivity_matches_dense_assembly() {
        let s = DirectedGraph::from_triples(4, &[(0, 1, 1.5), (0, 3, 0.5), (1, 2, 2.0), (3, 2, 1.0)]).unwrap();
        let h = [0.3, -1.2, 0.7, 0.2];
        let ls = laplacian(&s).to_dense();
        for (p, q, w) in [(0, 2, 2.0), (1, 0, 0.7), (2, 3, 1.1)] {
            let mut dl = nalgebra::DMatrix::<f64>::zeros(4, 4);
            dl[(p, p)] += w;
            dl[(q, p)] -= w;
            let dlu = &dl * ls.transpose() + &ls * dl.transpose();
            let hv = nalgebra::DVector::from_column_slice(&h);
            let expected = hv.dot(&(&dlu * &hv));
            let got = edge_sensitivity(&h, &s, p, q, w).unwrap();
            assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
            let doubled = edge_sensitivity(&h, &s, p, q, 2.0 * w).unwrap();
            assert_eq!(doubled, 2.0 * got);
        }
        assert!(matches!(
            edge_sensitivity(&h, &s, 0, 1, 1.0),
            Err(Error::EdgeInSubgraph(0, 1))
        ));
    }

    #[test]
    fn embedding_examples() {
        let s = DirectedGraph::from_triples(4, &[(0, 1, 2.0), (2, 3, 1.0)]).unwrap();
        let h = vec![1.0, 0.5, -0.5, 0.25];
        // node 3 has no subgraph out-edges
        assert_eq!(edge_embedding(&[h.clone()], &s, 3, 0).unwrap(), vec![0.0]);
        let e = edge_embedding(&[h.clone()], &s, 0, 2).unwrap();
        assert!((e[0] - 2.0 * 2.0 * (1.0 - -0.5) * (1.0 - 0.5)).abs() < 1e-15);
        assert!(edge_embedding(&[h], &s, 0, 1).is_err());
    }

    #[test]
    fn similarity_examples() {
        assert_eq!(spectral_similarity(&[1.0, 2.0], &[1.0, 2.0]), 1.0);
        assert_eq!(spectral_similarity(&[1.0, 2.0], &[0.0, 0.0]), 0.0);
        assert_eq!(spectral_similarity(&[0.0, 0.0], &[0.0, 0.0]), 1.0);
        let s = spectral_similarity(&[1.0, 0.0], &[0.0, 1.0]);
        assert!((s - (1.0 - 2f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn filter_examples() {
        let g = DirectedGraph::from_triples(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]).unwrap();
        let deg = vec![0; 4];
        let same: Vec<_> = (0..4).map(|i| score(i, &[1.0, 1.0])).collect();
        let kept = filter_similar_edges(&same, &g, &deg, 0.9, 10);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].edge_id, 0);

        let orth: Vec<_> = (0..4)
            .map(|i| {
                let mut v = vec![0.0; 4];
                v[i] = 1.0;
                score(i, &v)
            })
            .collect();
        assert_eq!(filter_similar_edges(&orth, &g, &deg, 0.9, 10).len(), 4);
        assert_eq!(filter_similar_edges(&orth[..1], &g, &deg, 0.9, 10).len(), 1);

        let busy = vec![10, 0, 10, 0];
        let kept: Vec<usize> = filter_similar_edges(&orth, &g, &busy, 0.9, 10)
            .iter()
            .map(|c| c.edge_id)
            .collect();
        assert_eq!(kept, vec![1, 3]);
    }

    #[test]
    fn planted_eigenvector_recovers_mu_max() {
        let g = DirectedGraph::from_triples(
            5,
            &[
                (0, 1, 1.0),
                (1, 2, 1.0),
                (2, 3, 1.0),
                (3, 4, 1.0),
                (4, 0, 1.0),
                (0, 2, 3.0),
                (2, 4, 0.5),
                (3, 1, 2.0),
            ],
        )
        .unwrap();
        let s = g.subgraph(&[0, 1, 3, 4, 5, 6]);
        let lgu = symmetrized_laplacian(&g).to_dense();
        let lsu = symmetrized_laplacian(&s).to_dense();
        let (mu_max, v) = crate::oracle::dominant_generalized_pair(&lgu, &lsu);
        let solver = SpsSolver::for_graph(&s, SolverParams::default()).unwrap();
        let pair = power_iterate(&laplacian(&g), &solver, v.as_slice(), 1).unwrap();
        assert!((pair.mu - mu_max).abs() < 1e-6 * mu_max, "{} vs {mu_max}", pair.mu);
    }
}
