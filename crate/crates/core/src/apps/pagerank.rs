use crate::error::{Error, Result};
use crate::graph::DirectedGraph;

/// Self-loop weight given to dangling nodes, relative to the largest edge weight.
pub const DANGLING_LOOP_SCALE: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct PageRankResult {
    pub p: Vec<f64>,
    pub alpha: f64,
    pub iterations: usize,
    /// L1 change of the last iteration.
    pub residual: f64,
    pub converged: bool,
}

/// Column-stochastic transition `P(i, j) = w_ji / d_j` stored by target row,
/// with self-loops on dangling nodes.
struct Transition {
    in_edges: Vec<Vec<(usize, f64)>>,
    self_loop: Vec<f64>,
}

impl Transition {
    fn new(g: &DirectedGraph) -> Self {
        let n = g.node_count();
        let mut out = g.weighted_out_degrees();
        let mut self_loop = vec![0.0; n];
        let loop_weight = DANGLING_LOOP_SCALE * g.max_weight().max(1.0);
        for (i, d) in out.iter_mut().enumerate() {
            if *d == 0.0 {
                *d = loop_weight;
                self_loop[i] = 1.0;
            }
        }
        let mut in_edges = vec![Vec::new(); n];
        for e in g.edges() {
            in_edges[e.head].push((e.tail, e.weight / out[e.tail]));
        }
        Self { in_edges, self_loop }
    }

    fn apply(&self, p: &[f64], i: usize) -> f64 {
        self.self_loop[i] * p[i] + self.in_edges[i].iter().map(|&(j, w)| w * p[j]).sum::<f64>()
    }
}

fn check_inputs(n: usize, alpha: f64, personalization: Option<&[f64]>) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    match personalization {
        None => Ok(vec![1.0 / n as f64; n]),
        Some(pr) => {
            if pr.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: pr.len() });
            }
            let sum: f64 = pr.iter().sum();
            if pr.iter().any(|&v| !(v >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidParameter(
                    "personalization must be a probability vector".into(),
                ));
            }
            Ok(pr.to_vec())
        }
    }
}

fn normalize(p: &mut [f64]) {
    let s: f64 = p.iter().sum();
    if s > 0.0 {
        p.iter_mut().for_each(|v| *v /= s);
    }
}

/// Power iteration for `p = (1 − α) Aᵀ D⁻¹ p + α pr`.
///
/// Stops when the L1 change drops below `tol`; otherwise returns the last
/// iterate with `converged = false`.
pub fn pagerank(
    g: &DirectedGraph,
    alpha: f64,
    personalization: Option<&[f64]>,
    tol: f64,
    max_iters: usize,
) -> Result<PageRankResult> {
    let n = g.node_count();
    let pr = check_inputs(n, alpha, personalization)?;
    let tr = Transition::new(g);
    let mut p = pr.clone();
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < max_iters {
        let next: Vec<f64> = (0..n)
            .map(|i| (1.0 - alpha) * tr.apply(&p, i) + alpha * pr[i])
            .collect();
        residual = next.iter().zip(&p).map(|(a, b)| (a - b).abs()).sum();
        p = next;
        iterations += 1;
        if residual <= tol {
            break;
        }
    }
    normalize(&mut p);
    Ok(PageRankResult {
        p,
        alpha,
        iterations,
        residual,
        converged: residual <= tol,
    })
}

/// Gauss–Seidel sweeps on `(I − (1 − α) Aᵀ D⁻¹) p = α pr`, starting from `p`.
pub fn pagerank_smooth(
    g: &DirectedGraph,
    alpha: f64,
    personalization: Option<&[f64]>,
    p: &[f64],
    sweeps: usize,
) -> Result<Vec<f64>> {
    let n = g.node_count();
    let pr = check_inputs(n, alpha, personalization)?;
    if p.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: p.len() });
    }
    let tr = Transition::new(g);
    let mut x = p.to_vec();
    for _ in 0..sweeps {
        for i in 0..n {
            let off: f64 = tr.in_edges[i].iter().map(|&(j, w)| w * x[j]).sum();
            let diag = 1.0 - (1.0 - alpha) * tr.self_loop[i];
            x[i] = (alpha * pr[i] + (1.0 - alpha) * off) / diag;
        }
    }
    normalize(&mut x);
    Ok(x)
}

/// Pearson correlation; `NaN` when either input is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    sab / (saa * sbb).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PageRankCorrelation {
    pub raw: f64,
    /// After `sweeps` Gauss–Seidel sweeps on the original graph's system.
    pub smoothed: f64,
}

/// Correlation between PageRank on `g` and on its sparsifier `s`.
pub fn pagerank_correlation(
    g: &DirectedGraph,
    s: &DirectedGraph,
    alpha: f64,
    personalization: Option<&[f64]>,
    sweeps: usize,
) -> Result<PageRankCorrelation> {
    const TOL: f64 = 1e-12;
    const MAX_ITERS: usize = 10_000;
    if g.node_count() != s.node_count() {
        return Err(Error::DimensionMismatch {
            expected: g.node_count(),
            got: s.node_count(),
        });
    }
    let reference = pagerank(g, alpha, personalization, TOL, MAX_ITERS)?.p;
    let approx = pagerank(s, alpha, personalization, TOL, MAX_ITERS)?.p;
    let smoothed = pagerank_smooth(g, alpha, personalization, &approx, sweeps)?;
    Ok(PageRankCorrelation {
        raw: pearson(&reference, &approx),
        smoothed: pearson(&reference, &smoothed),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn two_cycle_is_uniform() {
        let g = DirectedGraph::from_triples(2, &[(0, 1, 1.0), (1, 0, 3.0)]).unwrap();
        let r = pagerank(&g, 0.15, None, 1e-14, 1000).unwrap();
        assert!((r.p[0] - 0.5).abs() < 1e-12 && (r.p[1] - 0.5).abs() < 1e-12);
        assert!(r.converged);
    }

    #[test]
    fn single_node() {
        let g = DirectedGraph::new(1, []).unwrap();
        assert_eq!(pagerank(&g, 0.15, None, 1e-14, 100).unwrap().p, vec![1.0]);
    }

    #[test]
    fn chain_matches_dense_solve() {
        let g = DirectedGraph::from_triples(3, &[(0, 1, 1.0), (1, 2, 2.0)]).unwrap();
        let alpha = 0.15;
        let r = pagerank(&g, alpha, None, 1e-15, 10_000).unwrap();
        // node 2 is dangling and keeps its mass through the self-loop
        let p = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0]);
        let m = DMatrix::<f64>::identity(3, 3) - p * (1.0 - alpha);
        let exact = m.lu().solve(&DVector::from_element(3, alpha / 3.0)).unwrap();
        for i in 0..3 {
            assert!((r.p[i] - exact[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn smoothing_keeps_the_fixed_point() {
        let g = DirectedGraph::from_triples(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 0, 2.0), (2, 3, 1.0)]).unwrap();
        let r = pagerank(&g, 0.2, None, 1e-15, 10_000).unwrap();
        let s = pagerank_smooth(&g, 0.2, None, &r.p, 3).unwrap();
        for (a, b) in r.p.iter().zip(&s) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn personalization_is_validated() {
        let g = DirectedGraph::from_triples(2, &[(0, 1, 1.0)]).unwrap();
        assert!(pagerank(&g, 0.15, Some(&[0.5, 0.6]), 1e-10, 10).is_err());
        assert!(pagerank(&g, 0.0, None, 1e-10, 10).is_err());
        let r = pagerank(&g, 0.15, Some(&[1.0, 0.0]), 1e-14, 1000).unwrap();
        assert!((r.p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identical_graphs_correlate_perfectly() {
        let g = DirectedGraph::from_triples(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 0, 2.0), (2, 3, 1.0)]).unwrap();
        let c = pagerank_correlation(&g, &g, 0.15, None, 2).unwrap();
        assert!((c.raw - 1.0).abs() < 1e-12);
    }
}
