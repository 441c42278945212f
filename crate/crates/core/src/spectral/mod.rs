//! Spectral condition numbers `κ(GA) = λ_max / λ_min` of the preconditioned
//! system, by a dense similarity transform and by Lanczos iteration in the
//! `A`-inner product.

use std::fmt;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::io::fmt_f64;
use crate::linalg::dot;
use crate::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITERS: usize = 300;
pub const DEFAULT_SEED: u64 = 20240917;
pub const DENSE_EIG_MAX_N: usize = 2048;

pub const CSV_HEADER: &str = "method,n,iterations,lambda_min,lambda_max,kappa,seed,tol";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Dense,
    Lanczos,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Dense => "dense",
            Method::Lanczos => "lanczos",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub method: Method,
    pub n: usize,
    pub iterations: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub kappa: f64,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    /// False when Lanczos hit `max_iters` first; the estimates are partial.
    pub converged: bool,
    /// Extreme Ritz values after every Lanczos step.
    pub history: Vec<(f64, f64)>,
}

impl SpectrumReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.method,
            self.n,
            self.iterations,
            fmt_f64(self.lambda_min),
            fmt_f64(self.lambda_max),
            fmt_f64(self.kappa),
            self.seed.map(|s| s.to_string()).unwrap_or_default(),
            self.tol.map(fmt_f64).unwrap_or_default(),
        )
    }
}

fn check_square(a: &DMatrix<f64>, n: usize) -> Result<()> {
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: a.nrows().max(a.ncols()) });
    }
    Ok(())
}

/// All eigenvalues of `GA` in ascending order, from the symmetric matrix
/// `Lᵀ G L` with `A = L Lᵀ`.
pub fn dense_spectrum(g: &DMatrix<f64>, a: &DMatrix<f64>, max_n: usize) -> Result<Vec<f64>> {
    let n = a.nrows();
    if n > max_n {
        return Err(Error::SizeLimit { n, max: max_n });
    }
    check_square(a, n)?;
    check_square(g, n)?;
    let l = a.clone().cholesky().ok_or(Error::NotPositiveDefinite)?.unpack();
    let m = l.transpose() * g * &l;
    let m = (&m + m.transpose()) * 0.5;
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    Ok(ev)
}

pub fn dense_kappa(g: &DMatrix<f64>, a: &DMatrix<f64>, max_n: usize) -> Result<SpectrumReport> {
    let ev = dense_spectrum(g, a, max_n)?;
    let (lmin, lmax) = (ev[0], ev[ev.len() - 1]);
    if lmin <= 0.0 {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(SpectrumReport {
        method: Method::Dense,
        n: ev.len(),
        iterations: 0,
        lambda_min: lmin,
        lambda_max: lmax,
        kappa: lmax / lmin,
        seed: None,
        tol: None,
        converged: true,
        history: Vec::new(),
    })
}

/// Number of eigenvalues of the symmetric tridiagonal matrix below `x`.
fn sturm_count(alpha: &[f64], beta: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..alpha.len() {
        let b2 = if i == 0 { 0.0 } else { beta[i - 1] * beta[i - 1] };
        q = alpha[i] - x - if q != 0.0 { b2 / q } else { b2 / f64::EPSILON };
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Smallest and largest eigenvalue of a symmetric tridiagonal matrix by
/// bisection on Gershgorin bounds.
fn tridiagonal_extremes(alpha: &[f64], beta: &[f64]) -> (f64, f64) {
    let k = alpha.len();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..k {
        let r = if i > 0 { beta[i - 1].abs() } else { 0.0 } + if i + 1 < k { beta[i].abs() } else { 0.0 };
        lo = lo.min(alpha[i] - r);
        hi = hi.max(alpha[i] + r);
    }
    let bisect = |target: usize| {
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if sturm_count(alpha, beta, m) >= target {
                b = m;
            } else {
                a = m;
            }
        }
        0.5 * (a + b)
    };
    (bisect(1), bisect(k))
}

/// Lanczos on `GA`, which is self-adjoint in `⟨x, y⟩_A = xᵀ A y`, with full
/// reorthogonalization. Converged when both extreme Ritz values change by
/// less than `tol` relative on two consecutive steps, or on breakdown.
pub fn lanczos_kappa(
    apply_g: &dyn Fn(&[f64]) -> Vec<f64>,
    apply_a: &dyn Fn(&[f64]) -> Vec<f64>,
    n: usize,
    tol: f64,
    max_iters: usize,
    seed: u64,
) -> Result<SpectrumReport> {
    if n == 0 || tol <= 0.0 || max_iters == 0 {
        return Err(Error::InvalidArgument("lanczos needs n > 0, tol > 0, max_iters > 0".into()));
    }
    let max_iters = max_iters.min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut av = apply_a(&v);
    let nrm = dot(&v, &av);
    if nrm <= 0.0 {
        return Err(Error::NotPositiveDefinite);
    }
    let s = 1.0 / nrm.sqrt();
    v.iter_mut().for_each(|x| *x *= s);
    av.iter_mut().for_each(|x| *x *= s);

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut abasis: Vec<Vec<f64>> = Vec::new();
    let (mut alpha, mut beta) = (Vec::new(), Vec::new());
    let mut history: Vec<(f64, f64)> = Vec::new();
    let mut quiet = 0;
    let mut converged = false;
    let mut scale = 0.0f64;
    for _ in 0..max_iters {
        let mut w = apply_g(&av);
        let a_j = dot(&w, &av);
        alpha.push(a_j);
        scale = scale.max(a_j.abs());
        basis.push(v);
        abasis.push(av);
        for _ in 0..2 {
            for (b, ab) in basis.iter().zip(&abasis) {
                let c = dot(&w, ab);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let (lmin, lmax) = tridiagonal_extremes(&alpha, &beta);
        if let Some(&(pmin, pmax)) = history.last() {
            let small = ((lmin - pmin) / lmin).abs() < tol && ((lmax - pmax) / lmax).abs() < tol;
            quiet = if small { quiet + 1 } else { 0 };
        }
        history.push((lmin, lmax));
        let aw = apply_a(&w);
        let b2 = dot(&w, &aw);
        if b2 <= (1e-12 * scale).powi(2) {
            converged = true;
            break;
        }
        if quiet >= 2 {
            converged = true;
            break;
        }
        let b = b2.sqrt();
        beta.push(b);
        v = w.iter().map(|x| x / b).collect();
        av = aw.iter().map(|x| x / b).collect();
    }
    let (lmin, lmax) = *history.last().unwrap();
    if lmin <= 0.0 {
        return Err(Error::NotPositiveDefinite);
    }
    if basis.len() == n {
        converged = true;
    }
    Ok(SpectrumReport {
        method: Method::Lanczos,
        n,
        iterations: history.len(),
        lambda_min: lmin,
        lambda_max: lmax,
        kappa: lmax / lmin,
        seed: Some(seed),
        tol: Some(tol),
        converged,
        history,
    })
}

/// Dense pencil when `n ≤ dense_max_n`, Lanczos with declared defaults
/// otherwise.
pub fn kappa_auto(
    g: &dyn Fn(&[f64]) -> Vec<f64>,
    g_dense: &dyn Fn() -> Result<DMatrix<f64>>,
    a: &DMatrix<f64>,
    dense_max_n: usize,
    seed: u64,
) -> Result<SpectrumReport> {
    let n = a.nrows();
    if n <= dense_max_n {
        return dense_kappa(&g_dense()?, a, dense_max_n);
    }
    let apply_a = |x: &[f64]| {
        let mut y = vec![0.0; n];
        crate::linalg::dense_matvec(a, x, &mut y);
        y
    };
    lanczos_kappa(g, &apply_a, n, DEFAULT_TOL, DEFAULT_MAX_ITERS.min(n), seed)
}

#[cfg(test)]
mod tests;
