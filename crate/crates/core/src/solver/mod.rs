//! Solver for symmetric positive semidefinite Laplacian-like systems,
//! including the symmetrized directed Laplacians whose off-diagonals may be
//! positive.
//!
//! A multilevel hierarchy (low-degree elimination plus affinity-driven
//! aggregation, Gauss–Seidel smoothing and a dense pseudoinverse on the
//! coarsest level) preconditions conjugate gradients. Singular systems are
//! handled by projecting right-hand sides and iterates onto the orthogonal
//! complement of a known kernel, which yields the minimum-norm
//! (pseudoinverse) solution.

mod hierarchy;
mod kernel;
mod nullspace;
mod smoother;

pub use hierarchy::{build_hierarchy, build_hierarchy_with_kernel, node_affinity, Affinity, AggregationHierarchy, Elimination, Level, Transfer};
pub use kernel::symmetrized_kernel;
pub use nullspace::NullSpace;
pub use smoother::gauss_seidel;

pub(crate) use hierarchy::symmetric_pinv;

use crate::error::{Error, Result};
use crate::graph::{symmetrized_laplacian, DirectedGraph};
use crate::sparse::{axpy, dot, norm2, SparseMatrix};

#[derive(Debug, Clone)]
pub struct SolverParams {
    /// Number of relaxed test vectors used for affinities.
    pub test_vectors: usize,
    pub affinity_sweeps: usize,
    /// Minimum affinity for two nodes to share an aggregate.
    pub threshold: f64,
    pub max_aggregate_size: usize,
    pub pre_sweeps: usize,
    pub post_sweeps: usize,
    /// Operators at or below this size are inverted densely.
    pub coarsest_size: usize,
    pub max_levels: usize,
    pub eliminate_low_degree: bool,
    /// Relative residual target.
    pub tol: f64,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            test_vectors: 8,
            affinity_sweeps: 3,
            threshold: 0.4,
            max_aggregate_size: 8,
            pre_sweeps: 2,
            post_sweeps: 2,
            coarsest_size: 200,
            max_levels: 40,
            eliminate_low_degree: true,
            tol: 1e-8,
            max_iters: 1000,
            seed: 0x5eed,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        if self.test_vectors < 2 {
            return Err(Error::InvalidParameter("test_vectors must be at least 2".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter("tol must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::InvalidParameter("threshold must lie in [0, 1]".into()));
        }
        if self.max_aggregate_size < 2 || self.coarsest_size == 0 {
            return Err(Error::InvalidParameter("aggregate and coarsest sizes must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    /// `‖b − L x‖ / ‖b‖` of the returned iterate (0 when `b` projects to 0).
    pub residual: f64,
    pub converged: bool,
}

/// Preconditioned CG solver bound to one SPS operator.
///
/// Immutable after construction; concurrent solves against one instance are
/// safe.
#[derive(Debug, Clone)]
pub struct SpsSolver {
    matrix: SparseMatrix,
    hierarchy: AggregationHierarchy,
    nullspace: NullSpace,
    params: SolverParams,
}

impl SpsSolver {
    /// Detects a constant kernel (`L·1 = 0`) and deflates it if present.
    pub fn new(matrix: SparseMatrix, params: SolverParams) -> Result<Self> {
        let nullspace = if annihilates_constant(&matrix) {
            NullSpace::constant(matrix.nrows())
        } else {
            NullSpace::empty()
        };
        Self::with_nullspace(matrix, params, nullspace)
    }

    pub fn with_nullspace(matrix: SparseMatrix, params: SolverParams, nullspace: NullSpace) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare(matrix.nrows(), matrix.ncols()));
        }
        if nullspace.dim() > 0 && nullspace.len() != matrix.nrows() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                got: nullspace.len(),
            });
        }
        let hierarchy = build_hierarchy_with_kernel(&matrix, &params, Some(&nullspace))?;
        Ok(Self {
            matrix,
            hierarchy,
            nullspace,
            params,
        })
    }

    /// Solver for the symmetrized Laplacian of `g`, with its full kernel.
    pub fn for_graph(g: &DirectedGraph, params: SolverParams) -> Result<Self> {
        Self::with_nullspace(symmetrized_laplacian(g), params, symmetrized_kernel(g))
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn hierarchy(&self) -> &AggregationHierarchy {
        &self.hierarchy
    }

    pub fn nullspace(&self) -> &NullSpace {
        &self.nullspace
    }

    pub fn params(&self) -> &SolverParams {
        &self.params
    }

    fn precondition(&self, r: &[f64]) -> Vec<f64> {
        let mut z = self.hierarchy.vcycle(r);
        self.nullspace.project(&mut z);
        z
    }

    /// Minimum-norm solution of `L x = P b`, `P` the projector off the kernel.
    pub fn solve(&self, b: &[f64]) -> Result<(Vec<f64>, SolveStats)> {
        let n = self.matrix.nrows();
        if b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: b.len() });
        }
        let mut rhs = b.to_vec();
        self.nullspace.project(&mut rhs);
        let b_norm = norm2(&rhs);
        let mut x = vec![0.0; n];
        if b_norm == 0.0 {
            return Ok((
                x,
                SolveStats {
                    iterations: 0,
                    residual: 0.0,
                    converged: true,
                },
            ));
        }
        let tol = self.params.tol;
        let mut r = rhs.clone();
        let mut z = self.precondition(&r);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut ap = vec![0.0; n];
        let mut iterations = 0;
        let mut converged = false;
        while iterations < self.params.max_iters {
            self.matrix.mul_vec_into(&p, &mut ap);
            let pap = dot(&p, &ap);
            if !(pap > 0.0) || !(rz > 0.0) {
                break;
            }
            let alpha = rz / pap;
            axpy(alpha, &p, &mut x);
            axpy(-alpha, &ap, &mut r);
            iterations += 1;
            let rel = norm2(&r) / b_norm;
            if rel <= tol {
                converged = true;
                break;
            }
            if iterations % 50 == 0 {
                // guard against drift of the recursive residual
                self.nullspace.project(&mut x);
                r = residual(&self.matrix, &rhs, &x);
            }
            z = self.precondition(&r);
            let rz_next = dot(&r, &z);
            let beta = rz_next / rz;
            rz = rz_next;
            for (pi, zi) in p.iter_mut().zip(&z) {
                *pi = zi + beta * *pi;
            }
        }
        // the energy norm of the error decreases monotonically, the residual
        // need not, so the last iterate is returned even when unconverged
        self.nullspace.project(&mut x);
        let true_rel = norm2(&residual(&self.matrix, &rhs, &x)) / b_norm;
        Ok((
            x,
            SolveStats {
                iterations,
                residual: true_rel,
                converged: converged || true_rel <= tol,
            },
        ))
    }
}

fn residual(a: &SparseMatrix, b: &[f64], x: &[f64]) -> Vec<f64> {
    let ax = a.mul_vec(x);
    b.iter().zip(&ax).map(|(bi, axi)| bi - axi).collect()
}

fn annihilates_constant(a: &SparseMatrix) -> bool {
    if !a.is_square() || a.nrows() == 0 {
        return false;
    }
    let scale = a.max_abs();
    let ones = vec![1.0; a.ncols()];
    a.mul_vec(&ones)
        .iter()
        .all(|v| v.abs() <= 1e-10 * scale.max(f64::MIN_POSITIVE))
}

/// One-shot solve with default hierarchy parameters.
pub fn solve_sps(l: &SparseMatrix, b: &[f64], tol: f64, max_iters: usize) -> Result<(Vec<f64>, SolveStats)> {
    let params = SolverParams {
        tol,
        max_iters,
        ..SolverParams::default()
    };
    SpsSolver::new(l.clone(), params)?.solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singular_two_by_two_gives_zero_mean_solution() {
        let l = SparseMatrix::from_triplets(
            2,
            2,
            &[(0, 0, 1.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 1.0)],
        );
        let (x, stats) = solve_sps(&l, &[1.0, -1.0], 1e-10, 100).unwrap();
        assert!(stats.converged);
        assert!((x[0] - 0.5).abs() < 1e-10 && (x[1] + 0.5).abs() < 1e-10);
        assert!((x[0] + x[1]).abs() < 1e-14);
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let l = SparseMatrix::from_triplets(2, 2, &[(0, 0, 2.0), (1, 1, 2.0)]);
        let (x, stats) = solve_sps(&l, &[0.0, 0.0], 1e-8, 10).unwrap();
        assert_eq!(x, vec![0.0, 0.0]);
        assert_eq!(stats.iterations, 0);
    }

    #[test]
    fn nonsingular_two_by_two() {
        let l = SparseMatrix::from_triplets(
            2,
            2,
            &[(0, 0, 2.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 2.0)],
        );
        let (x, _) = solve_sps(&l, &[1.0, 0.0], 1e-12, 100).unwrap();
        assert!((x[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((x[1] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn reports_non_convergence_with_best_iterate() {
        let n = 400;
        let mut t = Vec::new();
        for i in 0..n - 1 {
            t.extend([(i, i, 1.0), (i + 1, i + 1, 1.0), (i, i + 1, -1.0), (i + 1, i, -1.0)]);
        }
        let l = SparseMatrix::from_triplets(n, n, &t);
        let mut b = vec![0.0; n];
        b[0] = 1.0;
        b[n - 1] = -1.0;
        let params = SolverParams {
            tol: 1e-14,
            max_iters: 1,
            eliminate_low_degree: false,
            ..SolverParams::default()
        };
        let (x, stats) = SpsSolver::new(l, params).unwrap().solve(&b).unwrap();
        assert_eq!(stats.iterations, 1);
        assert!(!stats.converged);
        assert!(stats.residual > 0.0);
        assert_eq!(x.len(), n);
    }
}
