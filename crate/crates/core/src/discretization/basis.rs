//! Local polynomial bases on the reference simplex.

use nalgebra::DMatrix;

use crate::{Error, Result};

/// Polynomials `ξ_i = Σ_k c_ik x̃^{a_k} ỹ^{b_k}` in the reference coordinates
/// `x = λ_1`, `y = λ_2` of a cell, shifted to the barycenter
/// (`x̃ = x − 1/(d+1)`). Mapped affinely, a basis with
/// `mean(ξ_i ξ_j) = δ_ij` on the reference simplex satisfies
/// `⟨ξ_i, ξ_j⟩_{L2(T)} = δ_ij |T|` on every cell.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalPolyBasis {
    pub dim: usize,
    pub degree: usize,
    pub exponents: Vec<[usize; 2]>,
    pub coeffs: DMatrix<f64>,
}

/// Number of polynomials of total degree ≤ ℓ in d variables, C(d+ℓ, ℓ).
pub fn poly_dim(dim: usize, degree: usize) -> usize {
    match dim {
        1 => degree + 1,
        2 => (degree + 1) * (degree + 2) / 2,
        _ => unreachable!(),
    }
}

fn exponents(dim: usize, degree: usize) -> Vec<[usize; 2]> {
    let mut e = Vec::new();
    for total in 0..=degree {
        if dim == 1 {
            e.push([total, 0]);
        } else {
            for b in 0..=total {
                e.push([total - b, b]);
            }
        }
    }
    e
}



/// Mean of `x̃^a ỹ^b` over the reference simplex, by an exact rule in the
/// centered variables (the binomial expansion of raw moments cancels badly).
fn monomial_mean(dim: usize, a: usize, b: usize) -> f64 {
    let c = 1.0 / (dim as f64 + 1.0);
    let r = crate::discretization::quadrature::simplex_rule(dim, a + b);
    (0..r.len())
        .map(|k| {
            let l = r.point(k);
            let y = if dim == 2 { l[2] - c } else { 0.0 };
            r.weights[k] * (l[1] - c).powi(a as i32) * y.powi(b as i32)
        })
        .sum()
}

/// L2-orthogonal basis with `ξ_0 = 1` and `∥ξ_i∥² = |T|`, obtained by
/// Gram-Schmidt against exact monomial moments.
pub fn local_orthonormal_basis(dim: usize, degree: usize) -> Result<LocalPolyBasis> {
    if !(1..=2).contains(&dim) {
        return Err(Error::InvalidArgument(format!("no local basis for d = {dim}")));
    }
    let exps = exponents(dim, degree);
    let n = exps.len();
    let gram = DMatrix::from_fn(n, n, |i, j| monomial_mean(dim, exps[i][0] + exps[j][0], exps[i][1] + exps[j][1]));
    let chol = gram.clone().cholesky().ok_or(Error::NotPositiveDefinite)?;
    let mut coeffs = chol.l().try_inverse().ok_or(Error::NotPositiveDefinite)?;
    // second pass against the same moments removes the rounding left by the
    // ill-conditioned monomial Gram matrix
    let g2 = &coeffs * &gram * coeffs.transpose();
    let l2 = g2.cholesky().ok_or(Error::NotPositiveDefinite)?.l();
    coeffs = l2.try_inverse().ok_or(Error::NotPositiveDefinite)? * coeffs;
    Ok(LocalPolyBasis { dim, degree, exponents: exps, coeffs })
}

impl LocalPolyBasis {
    /// Plain monomials (not orthogonal); used to exercise error paths.
    pub fn monomials(dim: usize, degree: usize) -> Self {
        let exps = exponents(dim, degree);
        let n = exps.len();
        LocalPolyBasis { dim, degree, exponents: exps, coeffs: DMatrix::identity(n, n) }
    }

    pub fn len(&self) -> usize {
        self.coeffs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Values of all basis functions at barycentric point `lambda`.
    pub fn eval(&self, lambda: &[f64], out: &mut [f64]) {
        let c = 1.0 / (self.dim as f64 + 1.0);
        let x = lambda[1] - c;
        let y = if self.dim == 2 { lambda[2] - c } else { 0.0 };
        let mono: Vec<f64> = self.exponents.iter().map(|e| x.powi(e[0] as i32) * y.powi(e[1] as i32)).collect();
        for (i, o) in out.iter_mut().enumerate().take(self.len()) {
            *o = (0..mono.len()).map(|k| self.coeffs[(i, k)] * mono[k]).sum();
        }
    }

    /// Reference Gram matrix `mean(ξ_i ξ_j)` from exact moments.
    pub fn reference_gram(&self) -> DMatrix<f64> {
        let e = &self.exponents;
        let m = DMatrix::from_fn(e.len(), e.len(), |i, j| monomial_mean(self.dim, e[i][0] + e[j][0], e[i][1] + e[j][1]));
        &self.coeffs * m * self.coeffs.transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::quadrature::simplex_rule;

    #[test]
    fn linear_legendre_on_segment() {
        let b = local_orthonormal_basis(1, 1).unwrap();
        let mut v = [0.0; 2];
        for t in [0.0, 0.3, 1.0] {
            b.eval(&[1.0 - t, t], &mut v);
            assert!((v[0] - 1.0).abs() < 1e-15);
            assert!((v[1] - 3f64.sqrt() * (2.0 * t - 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn gram_is_identity_by_quadrature() {
        for dim in 1..=2 {
            for degree in 0..=4 {
                let b = local_orthonormal_basis(dim, degree).unwrap();
                assert_eq!(b.len(), poly_dim(dim, degree));
                let r = simplex_rule(dim, 2 * degree);
                let mut g = DMatrix::<f64>::zeros(b.len(), b.len());
                let mut v = vec![0.0; b.len()];
                for k in 0..r.len() {
                    b.eval(r.point(k), &mut v);
                    for i in 0..b.len() {
                        for j in 0..b.len() {
                            g[(i, j)] += r.weights[k] * v[i] * v[j];
                        }
                    }
                }
                let err = (g - DMatrix::identity(b.len(), b.len())).abs().max();
                assert!(err < 1e-12, "d={dim} l={degree}: {err}");
            }
        }
    }
}
