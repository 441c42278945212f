//! Small linear algebra layer: CSR matrices, an operator trait shared by
//! dense and sparse storage, a sparse Cholesky for the fine-grid oracle
//! solves, and Gauss-Legendre rules.

pub mod cholesky;
pub mod gauss;
pub mod sparse;

use nalgebra::DMatrix;

pub use cholesky::SparseCholesky;
pub use sparse::CsrMatrix;

/// A square or rectangular linear map that can be applied to vectors and
/// materialized densely for oracle checks.
pub trait LinearOperator: Send + Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    /// `y = self * x`; `y` is overwritten.
    fn apply(&self, x: &[f64], y: &mut [f64]);
    fn to_dense(&self) -> DMatrix<f64>;
    /// Number of stored entries traversed by one application.
    fn nnz(&self) -> usize;
}

impl LinearOperator for DMatrix<f64> {
    fn nrows(&self) -> usize {
        self.nrows()
    }
    fn ncols(&self) -> usize {
        self.ncols()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        dense_matvec(self, x, y);
    }
    fn to_dense(&self) -> DMatrix<f64> {
        self.clone()
    }
    fn nnz(&self) -> usize {
        self.nrows() * self.ncols()
    }
}

impl LinearOperator for CsrMatrix {
    fn nrows(&self) -> usize {
        self.nrows()
    }
    fn ncols(&self) -> usize {
        self.ncols()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec(x, y);
    }
    fn to_dense(&self) -> DMatrix<f64> {
        CsrMatrix::to_dense(self)
    }
    fn nnz(&self) -> usize {
        CsrMatrix::nnz(self)
    }
}

/// Row-major traversal of a column-major dense matrix, accumulating in a
/// fixed order so results do not depend on threading.
pub fn dense_matvec(a: &DMatrix<f64>, x: &[f64], y: &mut [f64]) {
    assert_eq!(a.ncols(), x.len());
    assert_eq!(a.nrows(), y.len());
    y.iter_mut().for_each(|v| *v = 0.0);
    for (j, &xj) in x.iter().enumerate() {
        if xj == 0.0 {
            continue;
        }
        let col = a.column(j);
        for (yi, aij) in y.iter_mut().zip(col.iter()) {
            *yi += aij * xj;
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Largest absolute entry of `a - a^T`.
pub fn max_asymmetry(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut m = 0.0f64;
    for i in 0..n {
        for j in 0..i {
            m = m.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    m
}

pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}
