use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};

use crate::sparse::{axpy, dot, norm2};

type SparseVec = Vec<(usize, f64)>;

/// A kernel to be projected out.
///
/// Either an orthonormal dense basis, or linearly independent sparse
/// spanning vectors `K` together with `(KᵀK)⁻¹`; the latter projects in
/// `O(nnz(K) + dim²)` and materializes an orthonormal basis only on request.
#[derive(Debug, Clone)]
pub struct NullSpace {
    n: usize,
    sparse: Option<Sparse>,
    basis: OnceLock<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone)]
struct Sparse {
    vectors: Vec<SparseVec>,
    gram_inv: DMatrix<f64>,
}

impl NullSpace {
    fn dense(n: usize, basis: Vec<Vec<f64>>) -> Self {
        Self {
            n,
            sparse: None,
            basis: OnceLock::from(basis),
        }
    }

    /// `span{1}`.
    pub fn constant(n: usize) -> Self {
        let v = 1.0 / (n as f64).sqrt();
        Self::dense(n, vec![vec![v; n]])
    }

    pub fn empty() -> Self {
        Self::dense(0, Vec::new())
    }

    /// Orthonormalizes the given spanning vectors (modified Gram–Schmidt,
    /// applied twice); numerically dependent vectors are discarded.
    pub fn from_vectors(vectors: Vec<Vec<f64>>) -> Self {
        let n = vectors.first().map_or(0, Vec::len);
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
        for mut v in vectors {
            let original = norm2(&v);
            if original == 0.0 {
                continue;
            }
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(q, &v);
                    axpy(-c, q, &mut v);
                }
            }
            let remaining = norm2(&v);
            if remaining > 1e-10 * original {
                v.iter_mut().for_each(|x| *x /= remaining);
                basis.push(v);
            }
        }
        Self::dense(n, basis)
    }

    /// Span of sparse vectors of length `n` that the caller knows to be
    /// linearly independent. Falls back to [`NullSpace::from_vectors`] if
    /// their Gram matrix turns out numerically singular.
    pub fn from_independent_sparse(n: usize, vectors: Vec<SparseVec>) -> Self {
        if vectors.is_empty() {
            return Self::dense(n, Vec::new());
        }
        let k = vectors.len();
        let gram = {
            // columns share rows only where supports overlap, so accumulate
            // through a row-wise index
            let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
            for (j, v) in vectors.iter().enumerate() {
                for &(i, x) in v {
                    rows[i].push((j, x));
                }
            }
            let mut g = DMatrix::<f64>::zeros(k, k);
            for row in &rows {
                for &(a, xa) in row {
                    for &(b, xb) in row {
                        g[(a, b)] += xa * xb;
                    }
                }
            }
            g
        };
        let scale = gram.diagonal().max();
        let well_posed = gram
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .all(|&l| l > 1e-12 * scale);
        match gram.cholesky().filter(|_| well_posed) {
            Some(chol) => Self {
                n,
                sparse: Some(Sparse {
                    vectors,
                    gram_inv: chol.inverse(),
                }),
                basis: OnceLock::new(),
            },
            None => Self::from_vectors(vectors.iter().map(|v| densify(n, v)).collect()),
        }
    }

    pub fn dim(&self) -> usize {
        match &self.sparse {
            Some(s) => s.vectors.len(),
            None => self.basis().len(),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.dim() == 0
    }

    /// Orthonormal basis, computed on first use for sparse kernels.
    pub fn basis(&self) -> &[Vec<f64>] {
        self.basis.get_or_init(|| {
            let s = self.sparse.as_ref().expect("dense kernels are initialized eagerly");
            let dense = s.vectors.iter().map(|v| densify(self.n, v)).collect();
            Self::from_vectors(dense).basis.into_inner().unwrap_or_default()
        })
    }

    /// Removes the kernel component of `v` in place.
    pub fn project(&self, v: &mut [f64]) {
        match &self.sparse {
            Some(s) => {
                let c = DVector::from_iterator(
                    s.vectors.len(),
                    s.vectors.iter().map(|k| k.iter().map(|&(i, x)| x * v[i]).sum::<f64>()),
                );
                let y = &s.gram_inv * c;
                for (k, &yj) in s.vectors.iter().zip(y.iter()) {
                    for &(i, x) in k {
                        v[i] -= yj * x;
                    }
                }
            }
            None => {
                for q in self.basis() {
                    let c = dot(q, v);
                    if c != 0.0 {
                        axpy(-c, q, v);
                    }
                }
            }
        }
    }

    /// The same kernel seen on the entries `keep` only. Meant for restriction
    /// to the kept unknowns of a Schur complement, which is injective on the
    /// kernel.
    pub fn restrict(&self, keep: &[usize]) -> NullSpace {
        match &self.sparse {
            Some(s) => {
                let mut position = vec![usize::MAX; self.n];
                for (p, &i) in keep.iter().enumerate() {
                    position[i] = p;
                }
                let vectors = s
                    .vectors
                    .iter()
                    .map(|v| {
                        v.iter()
                            .filter(|&&(i, _)| position[i] != usize::MAX)
                            .map(|&(i, x)| (position[i], x))
                            .collect()
                    })
                    .collect();
                Self::from_independent_sparse(keep.len(), vectors)
            }
            None => Self::from_vectors(
                self.basis()
                    .iter()
                    .map(|v| keep.iter().map(|&i| v[i]).collect())
                    .collect(),
            ),
        }
    }

    /// Dense orthogonal projector onto the kernel.
    pub fn projector(&self) -> DMatrix<f64> {
        let mut p = DMatrix::<f64>::zeros(self.n, self.n);
        for v in self.basis() {
            let col = DVector::from_column_slice(v);
            p += &col * col.transpose();
        }
        p
    }
}

fn densify(n: usize, v: &SparseVec) -> Vec<f64> {
    let mut d = vec![0.0; n];
    for &(i, x) in v {
        d[i] = x;
    }
    d
}

impl PartialEq for NullSpace {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.basis() == other.basis()
    }
}
