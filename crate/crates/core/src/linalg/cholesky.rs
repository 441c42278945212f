//! Sparse Cholesky for the fine-grid oracle solves, backed by faer's
//! supernodal factorization with its fill-reducing ordering.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{MatMut, Side};

use super::sparse::CsrMatrix;
use crate::{Error, Result};

pub struct SparseCholesky {
    n: usize,
    llt: faer::sparse::linalg::solvers::Llt<usize, f64>,
}

impl SparseCholesky {
    /// Factors a symmetric positive definite matrix; only the lower
    /// triangle is read.
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: a.ncols() });
        }
        let lower: Vec<Triplet<usize, usize, f64>> = a
            .triplets()
            .into_iter()
            .filter(|&(i, j, _)| i >= j)
            .map(|(i, j, v)| Triplet::new(i, j, v))
            .collect();
        let m = SparseColMat::try_new_from_triplets(n, n, &lower).map_err(|e| Error::InvalidArgument(format!("{e:?}")))?;
        let llt = m.sp_cholesky(Side::Lower).map_err(|_| Error::NotPositiveDefinite)?;
        Ok(SparseCholesky { n, llt })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_block(&mut x, 1);
        x
    }

    /// Overwrites `k` right-hand sides, stored column by column in `b`,
    /// with the solutions.
    pub fn solve_block(&self, b: &mut [f64], k: usize) {
        assert_eq!(b.len(), self.n * k);
        self.llt.solve_in_place(MatMut::from_column_major_slice_mut(b, self.n, k));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_2d(m: usize) -> CsrMatrix {
        let id = |i: usize, j: usize| i * m + j;
        let mut t = Vec::new();
        for i in 0..m {
            for j in 0..m {
                t.push((id(i, j), id(i, j), 4.0));
                if i + 1 < m {
                    t.push((id(i, j), id(i + 1, j), -1.0));
                    t.push((id(i + 1, j), id(i, j), -1.0));
                }
                if j + 1 < m {
                    t.push((id(i, j), id(i, j + 1), -1.0));
                    t.push((id(i, j + 1), id(i, j), -1.0));
                }
            }
        }
        CsrMatrix::from_triplets(m * m, m * m, &t)
    }

    #[test]
    fn solves_grid_laplacian() {
        let a = laplace_2d(12);
        let f = SparseCholesky::factor(&a).unwrap();
        let n = a.nrows();
        let xs: Vec<f64> = (0..2 * n).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut b = vec![0.0; 2 * n];
        a.matvec(&xs[..n], &mut b[..n]);
        a.matvec(&xs[n..], &mut b[n..]);
        let mut x = b.clone();
        f.solve_block(&mut x, 2);
        let err = x.iter().zip(&xs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
        let y = f.solve(&b[..n]);
        assert!(y.iter().zip(&x[..n]).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn rejects_indefinite() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)]);
        assert!(matches!(SparseCholesky::factor(&a), Err(Error::NotPositiveDefinite)));
    }
}
