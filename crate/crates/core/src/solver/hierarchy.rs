//! Multilevel setup: low-degree elimination followed by affinity-driven
//! aggregation, repeated until the operator is small enough for a dense
//! pseudoinverse.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::smoother::{backward_sweep, forward_sweep};
use super::{NullSpace, SolverParams};
use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

const NONE: usize = usize::MAX;

/// Levels with a coarse size above this fall back to smoothing-only solves
/// when aggregation stalls.
const DENSE_FALLBACK_LIMIT: usize = 1000;

/// Affinity score `c_uv` for the off-diagonal pair `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affinity {
    pub u: usize,
    pub v: usize,
    pub score: f64,
}

/// Relaxed test vectors: `K` random starts smoothed by Gauss–Seidel on `L x = 0`.
fn test_vectors(l: &SparseMatrix, k: usize, sweeps: usize, seed: u64) -> Vec<Vec<f64>> {
    let n = l.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zero = vec![0.0; n];
    (0..k)
        .map(|_| {
            let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            for _ in 0..sweeps {
                forward_sweep(l, &zero, &mut x);
            }
            x
        })
        .collect()
}

/// `c_uv = (X_u·X_v)² / ((X_u·X_u)(X_v·X_v))` for every stored off-diagonal
/// pair, where `X_u` collects node `u` across the relaxed test vectors.
pub fn node_affinity(l: &SparseMatrix, k: usize, seed: u64) -> Result<Vec<Affinity>> {
    if !l.is_square() {
        return Err(Error::NotSquare(l.nrows(), l.ncols()));
    }
    if k < 2 {
        return Err(Error::InvalidParameter("affinity needs at least two test vectors".into()));
    }
    Ok(affinity_with(l, k, SolverParams::default().affinity_sweeps, seed))
}

fn affinity_with(l: &SparseMatrix, k: usize, sweeps: usize, seed: u64) -> Vec<Affinity> {
    let vectors = test_vectors(l, k, sweeps, seed);
    let n = l.nrows();
    // node-major layout so each X_u is contiguous
    let samples: Vec<Vec<f64>> = (0..n).map(|u| vectors.iter().map(|x| x[u]).collect()).collect();
    let self_dot: Vec<f64> = samples.iter().map(|s| dot(s, s)).collect();
    let mut out = Vec::new();
    for u in 0..n {
        for (v, _) in l.row_iter(u) {
            if v <= u {
                continue;
            }
            out.push(Affinity {
                u,
                v,
                score: affinity_score(&samples[u], &samples[v], self_dot[u], self_dot[v]),
            });
        }
    }
    out
}

pub(crate) fn affinity_score(xu: &[f64], xv: &[f64], uu: f64, vv: f64) -> f64 {
    let denom = uu * vv;
    if denom == 0.0 {
        return 0.0;
    }
    let uv = dot(xu, xv);
    (uv * uv / denom).clamp(0.0, 1.0)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Exact elimination of independent degree-0/1 nodes.
#[derive(Debug, Clone)]
pub struct Elimination {
    /// Eliminated nodes, each with at most one neighbor (which is kept).
    pub eliminated: Vec<usize>,
    /// Kept nodes in coarse order.
    pub kept: Vec<usize>,
    diag: Vec<f64>,
    neighbor: Vec<Option<(usize, f64)>>,
}

#[derive(Debug, Clone)]
pub enum Transfer {
    Eliminate(Elimination),
    /// Piecewise-constant aggregation: `map[i]` is node `i`'s coarse node.
    Aggregate { map: Vec<usize>, coarse_n: usize },
}

#[derive(Debug, Clone)]
pub struct Level {
    pub matrix: SparseMatrix,
    pub transfer: Transfer,
}

#[derive(Debug, Clone)]
enum CoarseSolve {
    Pinv(DMatrix<f64>),
    Smooth(usize),
}

/// Sequence of fine-to-coarse levels ending in a coarsest operator.
#[derive(Debug, Clone)]
pub struct AggregationHierarchy {
    pub levels: Vec<Level>,
    pub coarsest: SparseMatrix,
    coarse_solve: CoarseSolve,
    pre_sweeps: usize,
    post_sweeps: usize,
}

impl AggregationHierarchy {
    pub fn level_count(&self) -> usize {
        self.levels.len() + 1
    }

    /// Operator sizes from finest to coarsest.
    pub fn sizes(&self) -> Vec<usize> {
        self.levels
            .iter()
            .map(|l| l.matrix.nrows())
            .chain(std::iter::once(self.coarsest.nrows()))
            .collect()
    }

    pub fn is_direct(&self) -> bool {
        matches!(self.coarse_solve, CoarseSolve::Pinv(_))
    }

    /// Symmetric V-cycle approximating the pseudoinverse applied to `b`.
    pub fn vcycle(&self, b: &[f64]) -> Vec<f64> {
        self.cycle_at(0, b)
    }

    fn cycle_at(&self, depth: usize, b: &[f64]) -> Vec<f64> {
        let Some(level) = self.levels.get(depth) else {
            return self.solve_coarsest(b);
        };
        let a = &level.matrix;
        match &level.transfer {
            Transfer::Eliminate(elim) => {
                let mut rhs: Vec<f64> = elim.kept.iter().map(|&i| b[i]).collect();
                let position = kept_positions(a.nrows(), &elim.kept);
                for (k, &f) in elim.eliminated.iter().enumerate() {
                    if let Some((nb, a_fc)) = elim.neighbor[k] {
                        rhs[position[nb]] -= a_fc * b[f] / elim.diag[k];
                    }
                }
                let coarse = self.cycle_at(depth + 1, &rhs);
                let mut x = vec![0.0; a.nrows()];
                for (c, &i) in elim.kept.iter().enumerate() {
                    x[i] = coarse[c];
                }
                for (k, &f) in elim.eliminated.iter().enumerate() {
                    if elim.diag[k] == 0.0 {
                        continue;
                    }
                    let coupled = elim.neighbor[k].map_or(0.0, |(nb, a_fc)| a_fc * x[nb]);
                    x[f] = (b[f] - coupled) / elim.diag[k];
                }
                x
            }
            Transfer::Aggregate { map, coarse_n } => {
                let mut x = vec![0.0; a.nrows()];
                for _ in 0..self.pre_sweeps {
                    forward_sweep(a, b, &mut x);
                }
                let ax = a.mul_vec(&x);
                let mut rc = vec![0.0; *coarse_n];
                for i in 0..a.nrows() {
                    rc[map[i]] += b[i] - ax[i];
                }
                let ec = self.cycle_at(depth + 1, &rc);
                for i in 0..a.nrows() {
                    x[i] += ec[map[i]];
                }
                for _ in 0..self.post_sweeps {
                    backward_sweep(a, b, &mut x);
                }
                x
            }
        }
    }

    fn solve_coarsest(&self, b: &[f64]) -> Vec<f64> {
        match &self.coarse_solve {
            CoarseSolve::Pinv(pinv) => {
                let n = b.len();
                (0..n)
                    .map(|i| (0..n).map(|j| pinv[(i, j)] * b[j]).sum())
                    .collect()
            }
            CoarseSolve::Smooth(sweeps) => {
                let mut x = vec![0.0; b.len()];
                for _ in 0..*sweeps {
                    forward_sweep(&self.coarsest, b, &mut x);
                    backward_sweep(&self.coarsest, b, &mut x);
                }
                x
            }
        }
    }
}

fn kept_positions(n: usize, kept: &[usize]) -> Vec<usize> {
    let mut pos = vec![NONE; n];
    for (c, &i) in kept.iter().enumerate() {
        pos[i] = c;
    }
    pos
}

/// Dense Moore–Penrose pseudoinverse of a symmetric matrix.
pub(crate) fn symmetric_pinv(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let eig = a.clone().symmetric_eigen();
    let scale = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cutoff = scale * 1e-13 * n as f64;
    let mut pinv = DMatrix::zeros(n, n);
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda <= cutoff {
            continue;
        }
        let v = eig.eigenvectors.column(k);
        pinv += (v * v.transpose()) / lambda;
    }
    pinv
}

/// `A⁺ = (A + s·KKᵀ)⁻¹ − KKᵀ/s` for an orthonormal kernel basis `K`.
/// `None` if the shifted matrix is not numerically positive definite.
fn kernel_pinv(a: &DMatrix<f64>, kernel: &NullSpace) -> Option<DMatrix<f64>> {
    let n = a.nrows();
    let s = (0..n).map(|i| a[(i, i)]).fold(0.0f64, f64::max).max(f64::MIN_POSITIVE);
    let kkt = if kernel.dim() == 0 {
        DMatrix::<f64>::zeros(n, n)
    } else if kernel.len() == n {
        kernel.projector()
    } else {
        return None;
    };
    let shifted = a + &kkt * s;
    let inv = shifted.cholesky()?.inverse() - kkt / s;
    Some((&inv + inv.transpose()) * 0.5)
}

fn try_eliminate(a: &SparseMatrix) -> Option<Elimination> {
    let n = a.nrows();
    let mut state = vec![0u8; n]; // 0 free, 1 eliminated, 2 kept-by-force
    let mut eliminated = Vec::new();
    let mut diag = Vec::new();
    let mut neighbor = Vec::new();
    for u in 0..n {
        if state[u] != 0 {
            continue;
        }
        let mut d = 0.0;
        let mut off = Vec::with_capacity(2);
        for (j, v) in a.row_iter(u) {
            if j == u {
                d = v;
            } else {
                off.push((j, v));
                if off.len() > 1 {
                    break;
                }
            }
        }
        if off.len() > 1 || (d <= 0.0 && !off.is_empty()) {
            continue;
        }
        if let Some(&(nb, _)) = off.first() {
            if state[nb] == 1 {
                continue;
            }
            state[nb] = 2;
        }
        state[u] = 1;
        eliminated.push(u);
        diag.push(d.max(0.0));
        neighbor.push(off.first().copied());
    }
    let min_count = (n / 20).max(1);
    if eliminated.len() < min_count || eliminated.len() == n {
        return None;
    }
    let kept: Vec<usize> = (0..n).filter(|&i| state[i] != 1).collect();
    Some(Elimination {
        eliminated,
        kept,
        diag,
        neighbor,
    })
}

fn schur_complement(a: &SparseMatrix, elim: &Elimination) -> SparseMatrix {
    let position = kept_positions(a.nrows(), &elim.kept);
    let mut triplets = Vec::new();
    for (c, &i) in elim.kept.iter().enumerate() {
        for (j, v) in a.row_iter(i) {
            if position[j] != NONE {
                triplets.push((c, position[j], v));
            }
        }
    }
    for (k, nb) in elim.neighbor.iter().enumerate() {
        if let Some((nb, a_fc)) = *nb {
            if elim.diag[k] != 0.0 {
                let p = position[nb];
                triplets.push((p, p, -a_fc * a_fc / elim.diag[k]));
            }
        }
    }
    SparseMatrix::from_triplets(elim.kept.len(), elim.kept.len(), &triplets)
}

/// Greedy aggregation: each node joins the neighbor with the strongest
/// affinity at or above `threshold`; nodes without one stay singletons.
fn aggregate(a: &SparseMatrix, affinity: &[Affinity], threshold: f64, max_size: usize) -> (Vec<usize>, usize) {
    let n = a.nrows();
    let mut strong: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for aff in affinity {
        if aff.score >= threshold {
            strong[aff.u].push((aff.v, aff.score));
            strong[aff.v].push((aff.u, aff.score));
        }
    }
    let mut map = vec![NONE; n];
    let mut sizes: Vec<usize> = Vec::new();
    for u in 0..n {
        if map[u] != NONE {
            continue;
        }
        let best = strong[u]
            .iter()
            .filter(|&&(v, _)| map[v] == NONE || sizes[map[v]] < max_size)
            .fold(None::<(usize, f64)>, |best, &(v, s)| match best {
                Some((bv, bs)) if bs > s || (bs == s && bv < v) => Some((bv, bs)),
                _ => Some((v, s)),
            });
        match best {
            Some((v, _)) if map[v] != NONE => {
                map[u] = map[v];
                sizes[map[v]] += 1;
            }
            Some((v, _)) => {
                map[u] = sizes.len();
                map[v] = sizes.len();
                sizes.push(2);
            }
            None => {
                map[u] = sizes.len();
                sizes.push(1);
            }
        }
    }
    (map, sizes.len())
}

/// Galerkin product `Pᵀ A P` for a piecewise-constant prolongation.
fn galerkin(a: &SparseMatrix, map: &[usize], coarse_n: usize) -> SparseMatrix {
    let triplets: Vec<_> = a.triplets().map(|(i, j, v)| (map[i], map[j], v)).collect();
    SparseMatrix::from_triplets(coarse_n, coarse_n, &triplets)
}

pub fn build_hierarchy(l: &SparseMatrix, params: &SolverParams) -> Result<AggregationHierarchy> {
    build_hierarchy_with_kernel(l, params, None)
}

/// Like [`build_hierarchy`], with a known kernel basis of `l`.
///
/// The kernel survives exact elimination levels (restricted to the kept
/// nodes). When it reaches the coarsest level intact, the dense solve uses
/// it directly instead of guessing the numerical rank from eigenvalues,
/// which matters for badly conditioned operators.
pub fn build_hierarchy_with_kernel(
    l: &SparseMatrix,
    params: &SolverParams,
    kernel: Option<&NullSpace>,
) -> Result<AggregationHierarchy> {
    if !l.is_square() {
        return Err(Error::NotSquare(l.nrows(), l.ncols()));
    }
    params.validate()?;
    let mut levels = Vec::new();
    let mut current = l.clone();
    let mut kernel: Option<NullSpace> = kernel.cloned();
    while current.nrows() > params.coarsest_size && levels.len() < params.max_levels {
        if params.eliminate_low_degree {
            if let Some(elim) = try_eliminate(&current) {
                let next = schur_complement(&current, &elim);
                kernel = kernel.map(|k| k.restrict(&elim.kept));
                levels.push(Level {
                    matrix: std::mem::replace(&mut current, next),
                    transfer: Transfer::Eliminate(elim),
                });
                continue;
            }
        }
        let affinity = affinity_with(
            &current,
            params.test_vectors,
            params.affinity_sweeps,
            params.seed.wrapping_add(levels.len() as u64),
        );
        let n = current.nrows();
        let mut threshold = params.threshold;
        let (mut map, mut coarse_n) = aggregate(&current, &affinity, threshold, params.max_aggregate_size);
        while coarse_n as f64 > 0.9 * n as f64 && threshold > 0.05 {
            threshold *= 0.5;
            (map, coarse_n) = aggregate(&current, &affinity, threshold, params.max_aggregate_size);
        }
        if coarse_n as f64 > 0.9 * n as f64 {
            break;
        }
        let next = galerkin(&current, &map, coarse_n);
        kernel = None;
        levels.push(Level {
            matrix: std::mem::replace(&mut current, next),
            transfer: Transfer::Aggregate { map, coarse_n },
        });
    }
    let n = current.nrows();
    let coarse_solve = if n <= params.coarsest_size.max(DENSE_FALLBACK_LIMIT) {
        let dense = current.to_dense();
        let inverse = kernel
            .and_then(|k| kernel_pinv(&dense, &k))
            .unwrap_or_else(|| symmetric_pinv(&dense));
        CoarseSolve::Pinv(inverse)
    } else {
        log::debug!("coarsening stalled at {n} unknowns; smoothing on the coarsest level");
        CoarseSolve::Smooth(10)
    };
    Ok(AggregationHierarchy {
        levels,
        coarsest: current,
        coarse_solve,
        pre_sweeps: params.pre_sweeps,
        post_sweeps: params.post_sweeps,
    })
}
