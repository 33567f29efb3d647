//! Dense reference computations for small graphs. Cubic cost; used to check
//! the sparse code paths and by the `spectrum` subcommand on small inputs.

use nalgebra::{DMatrix, DVector};

use crate::graph::{symmetrized_laplacian, DirectedGraph};
use crate::solver::{symmetrized_kernel, NullSpace};

/// Relative cutoff below which eigenvalues of a PSD matrix count as zero.
pub const RANK_TOL: f64 = 1e-10;

/// Whitening map `R = U₊ Λ₊^{-1/2}` onto the range of a PSD matrix.
fn whitening(b: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = b.clone().symmetric_eigen();
    let scale = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cutoff = RANK_TOL * scale.max(f64::MIN_POSITIVE) * b.nrows().max(1) as f64;
    let keep: Vec<usize> = (0..b.nrows()).filter(|&i| eig.eigenvalues[i] > cutoff).collect();
    let mut r = DMatrix::<f64>::zeros(b.nrows(), keep.len());
    for (c, &i) in keep.iter().enumerate() {
        let s = eig.eigenvalues[i].sqrt();
        for row in 0..b.nrows() {
            r[(row, c)] = eig.eigenvectors[(row, i)] / s;
        }
    }
    r
}

/// Orthonormal basis of the complement of `kernel`, as columns.
fn complement(n: usize, kernel: &NullSpace) -> DMatrix<f64> {
    let mut p = DMatrix::<f64>::identity(n, n);
    for v in kernel.basis() {
        let col = DVector::from_column_slice(v);
        p -= &col * col.transpose();
    }
    let eig = p.symmetric_eigen();
    let keep: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
    DMatrix::from_fn(n, keep.len(), |r, c| eig.eigenvectors[(r, keep[c])])
}

/// Eigenpairs of `B⁺A` where the kernel of `B` is given explicitly, so tiny
/// but genuine eigenvalues of `B` are kept rather than cut by a rank guess.
pub fn generalized_eigen_with_kernel(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    kernel: &NullSpace,
) -> (Vec<f64>, Vec<DVector<f64>>) {
    let q = complement(b.nrows(), kernel);
    let bq = q.transpose() * b * &q;
    let bq = (&bq + bq.transpose()) * 0.5;
    let eig = bq.symmetric_eigen();
    let keep: Vec<usize> = (0..eig.eigenvalues.len()).filter(|&i| eig.eigenvalues[i] > 0.0).collect();
    let mut r = DMatrix::<f64>::zeros(q.ncols(), keep.len());
    for (c, &i) in keep.iter().enumerate() {
        let s = eig.eigenvalues[i].sqrt();
        for row in 0..q.ncols() {
            r[(row, c)] = eig.eigenvectors[(row, i)] / s;
        }
    }
    let r = q * r;
    ritz(a, &r)
}

/// Exact `(μ_max, v₁)` for subgraph `s` of `g` on the symmetrized Laplacians,
/// using the structural kernel of `s`.
pub fn dominant_pair_for_graphs(g: &DirectedGraph, s: &DirectedGraph) -> (f64, DVector<f64>) {
    let a = symmetrized_laplacian(g).to_dense();
    let b = symmetrized_laplacian(s).to_dense();
    let (values, mut vectors) = generalized_eigen_with_kernel(&a, &b, &symmetrized_kernel(s));
    if values.is_empty() {
        return (0.0, DVector::zeros(a.nrows()));
    }
    (values[0], vectors.swap_remove(0))
}

fn ritz(a: &DMatrix<f64>, r: &DMatrix<f64>) -> (Vec<f64>, Vec<DVector<f64>>) {
    if r.ncols() == 0 {
        return (Vec::new(), Vec::new());
    }
    let m = r.transpose() * a * r;
    let m = (&m + m.transpose()) * 0.5;
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order.iter().map(|&i| r * eig.eigenvectors.column(i)).collect();
    (values, vectors)
}

/// Nonzero-range eigenvalues of `B⁺A` for symmetric PSD `A`, `B`, descending,
/// with the eigenvectors scaled so that `vᵀBv = 1`.
pub fn generalized_eigen(a: &DMatrix<f64>, b: &DMatrix<f64>) -> (Vec<f64>, Vec<DVector<f64>>) {
    ritz(a, &whitening(b))
}

/// `(μ_max, v₁)` of `B⁺A`, with `v₁ᵀBv₁ = 1`.
pub fn dominant_generalized_pair(a: &DMatrix<f64>, b: &DMatrix<f64>) -> (f64, DVector<f64>) {
    let (values, mut vectors) = generalized_eigen(a, b);
    if values.is_empty() {
        return (0.0, DVector::zeros(a.nrows()));
    }
    (values[0], vectors.swap_remove(0))
}

/// Moore–Penrose pseudoinverse of a symmetric matrix.
pub fn pinv(a: &DMatrix<f64>) -> DMatrix<f64> {
    crate::solver::symmetric_pinv(a)
}
