//! Iterative sparsification: grow a seed subgraph by the off-subgraph edges
//! with the largest spectral sensitivities until the dominant generalized
//! eigenvalue is small enough.

use std::time::Instant;

use log::{debug, info};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{laplacian, DirectedGraph};
use crate::seed::build_seed;
use crate::sensitivity::{
    default_starts, dominant_vectors, filter_similar_edges, mu_estimate, score_edges, sort_by_sensitivity, DEFAULT_D_OUT,
    DEFAULT_EPSILON, DEFAULT_STEPS,
};
use crate::solver::{SolverParams, SpsSolver};
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone)]
pub struct SparsifyParams {
    pub d_out: usize,
    pub iter_max: usize,
    pub mu_limit: f64,
    /// Share of the ranked off-subgraph edges considered per iteration, in percent.
    pub alpha_percent: f64,
    pub epsilon: f64,
    pub t: usize,
    /// Random starts per eigenvector estimate; `None` picks from the graph size.
    pub r: Option<usize>,
    pub seed: u64,
    pub solver: SolverParams,
}

impl Default for SparsifyParams {
    fn default() -> Self {
        Self {
            d_out: DEFAULT_D_OUT,
            iter_max: 20,
            mu_limit: 100.0,
            alpha_percent: 5.0,
            epsilon: DEFAULT_EPSILON,
            t: DEFAULT_STEPS,
            r: None,
            seed: 42,
            solver: SolverParams {
                tol: 1e-6,
                max_iters: 50,
                ..SolverParams::default()
            },
        }
    }
}

impl SparsifyParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if self.d_out == 0 {
            return bad("d_out must be positive");
        }
        if !(self.mu_limit > 0.0) {
            return bad("mu_limit must be positive");
        }
        if !(self.alpha_percent > 0.0 && self.alpha_percent <= 100.0) {
            return bad("alpha_percent must lie in (0, 100]");
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad("epsilon must lie in (0, 1)");
        }
        if self.t == 0 {
            return bad("t must be at least 1");
        }
        if self.r == Some(0) {
            return bad("r must be at least 1");
        }
        self.solver.validate()
    }
}

/// One row of the run report. Row 0 describes the seed subgraph.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub iteration: usize,
    pub mu_max: f64,
    pub edge_ratio: f64,
    pub wall_time_seconds: f64,
    pub edges_added: usize,
    pub edges_rejected: usize,
}

#[derive(Debug, Clone)]
pub struct Sparsifier {
    pub graph: DirectedGraph,
    /// Ids into the input graph's edge list, ascending.
    pub kept_edge_ids: Vec<usize>,
    pub seed_edge_ids: Vec<usize>,
    pub iterations: Vec<ReportRow>,
    pub mu_initial: f64,
    pub mu_final: f64,
    pub edge_ratio: f64,
}

impl Sparsifier {
    /// `μ_initial / μ_final`.
    pub fn reduction(&self) -> f64 {
        if self.mu_final > 0.0 {
            self.mu_initial / self.mu_final
        } else {
            1.0
        }
    }
}

/// Solver and eigenvector estimates for one subgraph.
struct Evaluation {
    graph: DirectedGraph,
    hs: Vec<Vec<f64>>,
    mu: f64,
}

struct Context<'a> {
    g: &'a DirectedGraph,
    l_g: SparseMatrix,
    params: &'a SparsifyParams,
    r: usize,
    rng: ChaCha8Rng,
}

impl Context<'_> {
    fn evaluate(&mut self, in_s: &[bool]) -> Result<Evaluation> {
        let ids: Vec<usize> = (0..in_s.len()).filter(|&i| in_s[i]).collect();
        let graph = self.g.subgraph(&ids);
        let solver = SpsSolver::for_graph(&graph, self.params.solver.clone())?;
        let pairs = dominant_vectors(&self.l_g, &solver, self.r, self.params.t, &mut self.rng)?;
        let mu = mu_estimate(&pairs);
        Ok(Evaluation {
            graph,
            hs: pairs.into_iter().map(|p| p.h).collect(),
            mu,
        })
    }
}

pub fn sparsify(g: &DirectedGraph, params: &SparsifyParams) -> Result<Sparsifier> {
    params.validate()?;
    let m = g.edge_count();
    let ratio = |in_s: &[bool]| {
        if m == 0 {
            1.0
        } else {
            in_s.iter().filter(|&&b| b).count() as f64 / m as f64
        }
    };
    let mut ctx = Context {
        g,
        l_g: laplacian(g),
        params,
        r: params.r.unwrap_or_else(|| default_starts(g.node_count())),
        rng: ChaCha8Rng::seed_from_u64(params.seed),
    };

    let start = Instant::now();
    let seed = build_seed(g);
    let mut in_s = vec![false; m];
    for &id in &seed.kept_edge_ids {
        in_s[id] = true;
    }
    let mut current = ctx.evaluate(&in_s)?;
    let mu_initial = current.mu;
    info!(
        "seed subgraph: {} of {} edges, mu_max ~ {:.4e}",
        seed.kept_edge_ids.len(),
        m,
        mu_initial
    );
    let mut rows = vec![ReportRow {
        iteration: 0,
        mu_max: mu_initial,
        edge_ratio: ratio(&in_s),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        edges_added: 0,
        edges_rejected: 0,
    }];

    let mut blocked = vec![false; m];
    let mut iter = 0;
    while current.mu > params.mu_limit && iter < params.iter_max {
        iter += 1;
        let t0 = Instant::now();
        let out_degree = current.graph.out_degrees();
        // tails at the out-degree cap stay there, so those edges are final rejects
        let mut candidates = Vec::new();
        for id in 0..m {
            if in_s[id] || blocked[id] {
                continue;
            }
            if out_degree[g.edge(id).tail] >= params.d_out {
                blocked[id] = true;
            } else {
                candidates.push(id);
            }
        }
        if candidates.is_empty() {
            debug!("no eligible off-subgraph edges left");
            break;
        }
        let mut scores = score_edges(g, &current.graph, &candidates, &current.hs)?;
        sort_by_sensitivity(&mut scores);
        let top = ((scores.len() as f64 * params.alpha_percent / 100.0).ceil() as usize).clamp(1, scores.len());
        scores.truncate(top);
        let picked = filter_similar_edges(&scores, g, &out_degree, params.epsilon, params.d_out);

        let mut trial = in_s.clone();
        for c in &picked {
            trial[c.edge_id] = true;
        }
        let next = ctx.evaluate(&trial)?;
        let (added, rejected) = if next.mu < current.mu {
            in_s = trial;
            current = next;
            (picked.len(), 0)
        } else {
            for c in &picked {
                blocked[c.edge_id] = true;
            }
            (0, picked.len())
        };
        debug!(
            "iteration {iter}: {} candidates, {} picked, mu_max ~ {:.4e}",
            candidates.len(),
            picked.len(),
            current.mu
        );
        rows.push(ReportRow {
            iteration: iter,
            mu_max: current.mu,
            edge_ratio: ratio(&in_s),
            wall_time_seconds: t0.elapsed().as_secs_f64(),
            edges_added: added,
            edges_rejected: rejected,
        });
    }

    let kept_edge_ids: Vec<usize> = (0..m).filter(|&i| in_s[i]).collect();
    info!(
        "sparsifier: {} of {} edges, mu_max {:.4e} -> {:.4e}",
        kept_edge_ids.len(),
        m,
        mu_initial,
        current.mu
    );
    Ok(Sparsifier {
        graph: current.graph,
        kept_edge_ids,
        seed_edge_ids: seed.kept_edge_ids,
        iterations: rows,
        mu_initial,
        mu_final: current.mu,
        edge_ratio: ratio(&in_s),
    })
}

/// `(μ_max estimate, μ_initial / μ_max)` for subgraph `s` of `g`.
pub fn condition_metrics(
    g: &DirectedGraph,
    s: &DirectedGraph,
    mu_initial: f64,
    r: usize,
    t: usize,
    seed: u64,
    solver: &SolverParams,
) -> Result<(f64, f64)> {
    let sps = SpsSolver::for_graph(s, solver.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mu = mu_estimate(&dominant_vectors(&laplacian(g), &sps, r, t, &mut rng)?);
    let ratio = if mu > 0.0 { mu_initial / mu } else { f64::INFINITY };
    Ok((mu, ratio))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tree_is_returned_unchanged() {
        let g = DirectedGraph::from_triples(5, &[(0, 1, 1.0), (1, 2, 2.0), (1, 3, 1.0), (3, 4, 0.5)]).unwrap();
        let s = sparsify(&g, &SparsifyParams::default()).unwrap();
        assert_eq!(s.graph, g);
        assert_eq!(s.edge_ratio, 1.0);
        assert_eq!(s.iterations.len(), 1);
        assert_eq!(s.reduction(), 1.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        let g = DirectedGraph::from_triples(2, &[(0, 1, 1.0)]).unwrap();
        for p in [
            SparsifyParams {
                alpha_percent: 0.0,
                ..Default::default()
            },
            SparsifyParams {
                epsilon: 1.0,
                ..Default::default()
            },
            SparsifyParams {
                d_out: 0,
                ..Default::default()
            },
        ] {
            assert!(matches!(sparsify(&g, &p), Err(Error::InvalidParameter(_))));
        }
    }

    #[test]
    fn disjoint_components_are_fine() {
        let g = DirectedGraph::from_triples(
            6,
            &[
                (0, 1, 1.0),
                (1, 2, 1.0),
                (2, 0, 1.0),
                (0, 2, 0.3),
                (3, 4, 2.0),
                (4, 5, 1.0),
                (5, 3, 1.0),
                (3, 5, 0.2),
            ],
        )
        .unwrap();
        let params = SparsifyParams {
            mu_limit: 1.0 + 1e-9,
            ..Default::default()
        };
        let s = sparsify(&g, &params).unwrap();
        assert!(s.mu_final <= s.mu_initial);
        assert_eq!(g.embed_subgraph(&s.graph).map(|ids| ids == s.kept_edge_ids), Some(true));
    }
}
