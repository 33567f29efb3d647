use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

/// Forward Gauss–Seidel sweeps on `L x = b` starting from `x0`.
pub fn gauss_seidel(l: &SparseMatrix, b: &[f64], x0: &[f64], sweeps: usize) -> Result<Vec<f64>> {
    if !l.is_square() {
        return Err(Error::NotSquare(l.nrows(), l.ncols()));
    }
    for v in [b.len(), x0.len()] {
        if v != l.nrows() {
            return Err(Error::DimensionMismatch {
                expected: l.nrows(),
                got: v,
            });
        }
    }
    if sweeps == 0 {
        return Err(Error::InvalidParameter("at least one sweep is required".into()));
    }
    if let Some(row) = l.diagonal().iter().position(|&d| d == 0.0) {
        return Err(Error::ZeroDiagonal(row));
    }
    let mut x = x0.to_vec();
    for _ in 0..sweeps {
        forward_sweep(l, b, &mut x);
    }
    Ok(x)
}

/// One forward sweep. Rows with a zero diagonal are left untouched.
pub(crate) fn forward_sweep(l: &SparseMatrix, b: &[f64], x: &mut [f64]) {
    for i in 0..l.nrows() {
        relax_row(l, b, x, i);
    }
}

pub(crate) fn backward_sweep(l: &SparseMatrix, b: &[f64], x: &mut [f64]) {
    for i in (0..l.nrows()).rev() {
        relax_row(l, b, x, i);
    }
}

#[inline]
fn relax_row(l: &SparseMatrix, b: &[f64], x: &mut [f64], i: usize) {
    let (cols, vals) = l.row(i);
    let mut diag = 0.0;
    let mut sum = b[i];
    for (&j, &v) in cols.iter().zip(vals) {
        if j == i {
            diag = v;
        } else {
            sum -= v * x[j];
        }
    }
    if diag != 0.0 {
        x[i] = sum / diag;
    }
}
