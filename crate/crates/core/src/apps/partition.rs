//! Spectral partitioning on the eigenvectors of the symmetrized Laplacian.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{symmetrized_laplacian, DirectedGraph};
use crate::solver::{SolverParams, SpsSolver};
use crate::sparse::SparseMatrix;

/// Largest graph handled by a dense eigendecomposition.
pub const DENSE_LIMIT: usize = 2000;
/// Eigenvalues closer than this (relative) are treated as one distinct value.
pub const MULTIPLICITY_TOL: f64 = 1e-8;
pub const KMEANS_RESTARTS: usize = 10;
const KMEANS_MAX_ITERS: usize = 300;
const SUBSPACE_ITERS: usize = 60;

#[derive(Debug, Clone)]
pub struct Partitioning {
    pub assignment: Vec<usize>,
    pub k: usize,
    /// Indices (ascending order) of the eigenpairs used for the embedding.
    pub eigvecs: Vec<usize>,
    pub eigenvalues: Vec<f64>,
}

/// Ascending eigenpairs of a symmetric PSD operator.
struct Spectrum {
    values: Vec<f64>,
    vectors: Vec<DVector<f64>>,
    /// Leading entries known to be exactly in the kernel.
    kernel_dim: usize,
}

fn dense_spectrum(lu: &SparseMatrix) -> Spectrum {
    let eig = lu.to_dense().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let scale = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let zero = 1e-10 * scale * lu.nrows() as f64;
    let kernel_dim = order.iter().filter(|&&i| eig.eigenvalues[i] <= zero).count();
    Spectrum {
        values: order
            .iter()
            .enumerate()
            .map(|(rank, &i)| if rank < kernel_dim { 0.0 } else { eig.eigenvalues[i] })
            .collect(),
        vectors: order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect(),
        kernel_dim,
    }
}

/// Kernel from the graph structure plus the `extra` smallest nonzero
/// eigenpairs by inverse subspace iteration.
fn iterative_spectrum(g: &DirectedGraph, extra: usize, seed: u64) -> Result<Spectrum> {
    let n = g.node_count();
    let solver = SpsSolver::for_graph(g, SolverParams::default())?;
    let kernel = solver.nullspace().clone();
    let lu = solver.matrix();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = extra.min(n.saturating_sub(kernel.dim()));
    let mut x = DMatrix::<f64>::from_fn(n, width, |_, _| rng.gen_range(-1.0..1.0));
    for _ in 0..SUBSPACE_ITERS {
        let mut cols = Vec::with_capacity(width);
        for c in 0..width {
            let mut v: Vec<f64> = x.column(c).iter().copied().collect();
            kernel.project(&mut v);
            cols.push(solver.solve(&v)?.0);
        }
        let y = DMatrix::from_fn(n, width, |i, j| cols[j][i]);
        x = y.qr().q();
    }
    // Rayleigh–Ritz on the converged block
    let lx = DMatrix::from_fn(n, width, |_, _| 0.0);
    let lx = (0..width).fold(lx, |mut acc, c| {
        let v: Vec<f64> = x.column(c).iter().copied().collect();
        let r = lu.mul_vec(&v);
        for i in 0..n {
            acc[(i, c)] = r[i];
        }
        acc
    });
    let h = x.transpose() * lx;
    let h = (&h + h.transpose()) * 0.5;
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..width).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

    let mut values = vec![0.0; kernel.dim()];
    let mut vectors: Vec<DVector<f64>> = kernel.basis().iter().map(|v| DVector::from_column_slice(v)).collect();
    for &i in &order {
        values.push(eig.eigenvalues[i]);
        vectors.push(&x * eig.eigenvectors.column(i));
    }
    Ok(Spectrum {
        values,
        vectors,
        kernel_dim: kernel.dim(),
    })
}

/// Indices chosen for a `k`-way embedding: the whole kernel, then one
/// representative per further distinct eigenvalue, until `k` are collected.
/// Returns `Err(available)` if the spectrum runs out first.
pub fn select_eigvecs(values: &[f64], kernel_dim: usize, k: usize) -> std::result::Result<Vec<usize>, usize> {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut picked: Vec<usize> = (0..kernel_dim.min(values.len())).collect();
    let mut last: Option<f64> = if kernel_dim > 0 { Some(0.0) } else { None };
    let mut distinct = usize::from(kernel_dim > 0);
    for (i, &v) in values.iter().enumerate().skip(kernel_dim) {
        if picked.len() >= k {
            break;
        }
        let same = last.is_some_and(|l| (v - l).abs() <= MULTIPLICITY_TOL * v.abs().max(l.abs()) + 1e-14 * scale);
        last = Some(v);
        if !same {
            distinct += 1;
            picked.push(i);
        }
    }
    if picked.len() < k {
        return Err(distinct);
    }
    Ok(picked)
}

pub fn spectral_partition(g: &DirectedGraph, k: usize, seed: u64) -> Result<Partitioning> {
    let n = g.node_count();
    if k < 2 {
        return Err(Error::InvalidParameter("k must be at least 2".into()));
    }
    if k > n {
        return Err(Error::TooFewEigenvalues {
            requested: k,
            available: n,
        });
    }
    let spectrum = if n <= DENSE_LIMIT {
        dense_spectrum(&symmetrized_laplacian(g))
    } else {
        iterative_spectrum(g, 2 * k + 4, seed)?
    };
    let picked = select_eigvecs(&spectrum.values, spectrum.kernel_dim, k).map_err(|available| Error::TooFewEigenvalues {
        requested: k,
        available,
    })?;
    let points: Vec<Vec<f64>> = (0..n)
        .map(|i| picked.iter().map(|&c| spectrum.vectors[c][i]).collect())
        .collect();
    let assignment = kmeans(&points, k, KMEANS_RESTARTS, seed).assignment;
    let k_used = assignment.iter().max().map_or(0, |m| m + 1);
    Ok(Partitioning {
        assignment,
        k: k_used,
        eigenvalues: picked.iter().map(|&c| spectrum.values[c]).collect(),
        eigvecs: picked,
    })
}

#[derive(Debug, Clone)]
pub struct Clustering {
    /// Cluster ids in `[0, k)`, numbered by first appearance.
    pub assignment: Vec<usize>,
    pub inertia: f64,
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn kmeans_pp<R: Rng>(points: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut centers = vec![points[rng.gen_range(0..points.len())].clone()];
    let mut d: Vec<f64> = points.iter().map(|p| dist2(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut idx = points.len() - 1;
            for (i, &w) in d.iter().enumerate() {
                if target < w {
                    idx = i;
                    break;
                }
                target -= w;
            }
            idx
        } else {
            rng.gen_range(0..points.len())
        };
        centers.push(points[next].clone());
        for (di, p) in d.iter_mut().zip(points) {
            *di = di.min(dist2(p, &centers[centers.len() - 1]));
        }
    }
    centers
}

fn lloyd(points: &[Vec<f64>], mut centers: Vec<Vec<f64>>) -> (Vec<usize>, f64) {
    let k = centers.len();
    let dim = points[0].len();
    let mut assignment = vec![usize::MAX; points.len()];
    for _ in 0..KMEANS_MAX_ITERS {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let best = (0..k)
                .min_by(|&a, &b| dist2(p, &centers[a]).total_cmp(&dist2(p, &centers[b])))
                .unwrap();
            if assignment[i] != best {
                assignment[i] = best;
                changed = true;
            }
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &c) in points.iter().zip(&assignment) {
            counts[c] += 1;
            for (s, v) in sums[c].iter_mut().zip(p) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                // reseed an empty cluster with the worst-served point
                let far = (0..points.len())
                    .max_by(|&a, &b| {
                        dist2(&points[a], &centers[assignment[a]]).total_cmp(&dist2(&points[b], &centers[assignment[b]]))
                    })
                    .unwrap();
                centers[c] = points[far].clone();
                assignment[far] = c;
                changed = true;
            } else {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        if !changed {
            break;
        }
    }
    let inertia = points
        .iter()
        .zip(&assignment)
        .map(|(p, &c)| dist2(p, &centers[c]))
        .sum();
    (assignment, inertia)
}

fn relabel(assignment: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    assignment
        .iter()
        .map(|&c| {
            let next = map.len();
            *map.entry(c).or_insert(next)
        })
        .collect()
}

/// k-means++ seeding and Lloyd iterations; the restart with the lowest
/// inertia wins.
pub fn kmeans(points: &[Vec<f64>], k: usize, restarts: usize, seed: u64) -> Clustering {
    assert!(k >= 1 && k <= points.len(), "k must lie in 1..=points");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(Vec<usize>, f64)> = None;
    for _ in 0..restarts.max(1) {
        let centers = kmeans_pp(points, k, &mut rng);
        let (a, inertia) = lloyd(points, centers);
        if best.as_ref().is_none_or(|b| inertia < b.1) {
            best = Some((a, inertia));
        }
    }
    let (assignment, inertia) = best.expect("at least one restart");
    Clustering {
        assignment: relabel(&assignment),
        inertia,
    }
}

/// Adjusted Rand index between two labelings of the same items.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len();
    let choose2 = |x: usize| (x * x.saturating_sub(1)) as f64 / 2.0;
    let mut table = std::collections::HashMap::<(usize, usize), usize>::new();
    let mut rows = std::collections::HashMap::<usize, usize>::new();
    let mut cols = std::collections::HashMap::<usize, usize>::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let index: f64 = table.values().map(|&c| choose2(c)).sum();
    let sa: f64 = rows.values().map(|&c| choose2(c)).sum();
    let sb: f64 = cols.values().map(|&c| choose2(c)).sum();
    let expected = sa * sb / choose2(n);
    let max = 0.5 * (sa + sb);
    if max == expected {
        return 1.0;
    }
    (index - expected) / (max - expected)
}
