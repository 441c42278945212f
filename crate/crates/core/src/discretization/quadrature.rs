//! Quadrature on the reference simplex in barycentric coordinates.

use crate::linalg::gauss::gauss_legendre;

/// Points in barycentric coordinates (stride `d + 1`) and weights that sum
/// to one, so `∫_T f = |T| Σ w_k f(x_k)`.
#[derive(Debug, Clone)]
pub struct SimplexRule {
    pub dim: usize,
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SimplexRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, k: usize) -> &[f64] {
        &self.points[k * (self.dim + 1)..(k + 1) * (self.dim + 1)]
    }
}

/// Rule exact for polynomials of total degree `degree`.
pub fn simplex_rule(dim: usize, degree: usize) -> SimplexRule {
    match dim {
        1 => {
            let (x, w) = gauss_legendre(degree / 2 + 1);
            let points = x.iter().flat_map(|&t| [1.0 - t, t]).collect();
            SimplexRule { dim, points, weights: w }
        }
        2 => {
            // collapsed Gauss: x = u, y = (1 - u) v, Jacobian (1 - u)
            let (u, wu) = gauss_legendre(degree.div_ceil(2) + 1);
            let (v, wv) = gauss_legendre(degree / 2 + 1);
            let mut points = Vec::new();
            let mut weights = Vec::new();
            for (ui, wui) in u.iter().zip(&wu) {
                for (vj, wvj) in v.iter().zip(&wv) {
                    let x = *ui;
                    let y = (1.0 - ui) * vj;
                    points.extend([1.0 - x - y, x, y]);
                    weights.push(2.0 * (1.0 - ui) * wui * wvj);
                }
            }
            SimplexRule { dim, points, weights }
        }
        _ => panic!("simplex rules are provided for d = 1, 2"),
    }
}

/// Composite rule on the barycentric subdivision: exact for functions that
/// are polynomials of degree `degree` on each of the sub-simplices.
pub fn split_rule(dim: usize, degree: usize) -> SimplexRule {
    let base = simplex_rule(dim, degree);
    let n = dim + 1;
    let center = vec![1.0 / n as f64; n];
    let mut subs: Vec<Vec<Vec<f64>>> = Vec::new();
    for i in 0..n {
        let mut vi = vec![0.0; n];
        vi[i] = 1.0;
        if dim == 1 {
            subs.push(vec![vi, center.clone()]);
            continue;
        }
        for j in 0..n {
            if j != i {
                let mut m = vec![0.0; n];
                m[i] = 0.5;
                m[j] = 0.5;
                subs.push(vec![vi.clone(), m, center.clone()]);
            }
        }
    }
    let scale = 1.0 / subs.len() as f64;
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for s in &subs {
        for k in 0..base.len() {
            let mu = base.point(k);
            for c in 0..n {
                points.push((0..n).map(|a| mu[a] * s[a][c]).sum());
            }
            weights.push(base.weights[k] * scale);
        }
    }
    SimplexRule { dim, points, weights }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    #[test]
    fn exact_barycentric_moments() {
        // mean of λ^α over the simplex is d! α! / (d + |α|)!
        for dim in 1..=2 {
            for deg in 0..=12 {
                let r = simplex_rule(dim, deg);
                assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
                for a in 0..=deg {
                    for b in 0..=(deg - a) {
                        let c = if dim == 2 { deg - a - b } else { 0 };
                        if dim == 1 && a + b != deg {
                            continue;
                        }
                        let q: f64 = (0..r.len())
                            .map(|k| {
                                let p = r.point(k);
                                let mut v = p[0].powi(a as i32) * p[1].powi(b as i32);
                                if dim == 2 {
                                    v *= p[2].powi(c as i32);
                                }
                                r.weights[k] * v
                            })
                            .sum();
                        let exact = factorial(dim) * factorial(a) * factorial(b) * factorial(c)
                            / factorial(dim + a + b + c);
                        assert!((q - exact).abs() < 1e-14 * exact.max(1e-3), "d={dim} {a},{b},{c}");
                    }
                }
            }
        }
    }

    #[test]
    fn split_rule_integrates_min_lambda() {
        // mean of min λ equals 1/(d+1)^2
        for dim in 1..=2 {
            let r = split_rule(dim, 1);
            let q: f64 = (0..r.len())
                .map(|k| r.weights[k] * r.point(k).iter().copied().fold(f64::INFINITY, f64::min))
                .sum();
            let exact = 1.0 / ((dim + 1) * (dim + 1)) as f64;
            assert!((q - exact).abs() < 1e-15, "{q} {exact}");
        }
    }
}
