use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::linalg::dense_matvec;

fn random_spd(n: usize, seed: u64, spread: f64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let q = b.qr().q();
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |i, _| spread.powf(i as f64 / (n - 1).max(1) as f64)));
    let m = &q * d * q.transpose();
    (&m + m.transpose()) * 0.5
}

fn op(m: &DMatrix<f64>) -> impl Fn(&[f64]) -> Vec<f64> + '_ {
    move |x| {
        let mut y = vec![0.0; m.nrows()];
        dense_matvec(m, x, &mut y);
        y
    }
}

#[test]
fn perfect_preconditioner() {
    let a = random_spd(30, 1, 100.0);
    let g = a.clone().try_inverse().unwrap();
    let r = dense_kappa(&g, &a, 100).unwrap();
    assert!((r.kappa - 1.0).abs() < 1e-10);
    let l = lanczos_kappa(&op(&g), &op(&a), 30, 1e-8, 300, 3).unwrap();
    assert_eq!(l.iterations, 1);
    assert!(l.converged);
    assert!((l.kappa - 1.0).abs() < 1e-10);
}

#[test]
fn diagonal_pencil() {
    let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 4.0]));
    let r = dense_kappa(&DMatrix::identity(2, 2), &a, 10).unwrap();
    assert!((r.kappa - 4.0).abs() < 1e-14);
    assert_eq!((r.lambda_min, r.lambda_max), (1.0, 4.0));
}

#[test]
fn dense_matches_brute_force() {
    let a = random_spd(50, 7, 1e3);
    let g = random_spd(50, 8, 10.0);
    let ev = dense_spectrum(&g, &a, 100).unwrap();
    // GA is similar to A^{1/2} G A^{1/2}; brute force via its eigenvectors
    let e = a.clone().symmetric_eigen();
    let sq = &e.eigenvectors
        * DMatrix::from_diagonal(&e.eigenvalues.map(|x| x.sqrt()))
        * e.eigenvectors.transpose();
    let mut brute: Vec<f64> = (&sq * &g * &sq).symmetric_eigenvalues().iter().copied().collect();
    brute.sort_by(|x, y| x.total_cmp(y));
    for (x, y) in ev.iter().zip(&brute) {
        assert!((x - y).abs() <= 1e-10 * brute[49], "{x} {y}");
    }
}

#[test]
fn errors() {
    let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -1.0]));
    assert!(matches!(dense_kappa(&DMatrix::identity(2, 2), &a, 10), Err(Error::NotPositiveDefinite)));
    assert!(matches!(
        dense_kappa(&DMatrix::identity(3, 3), &DMatrix::identity(3, 3), 2),
        Err(Error::SizeLimit { .. })
    ));
    assert!(dense_kappa(&DMatrix::identity(2, 2), &DMatrix::identity(3, 3), 10).is_err());
    let id = DMatrix::<f64>::identity(3, 3);
    assert!(lanczos_kappa(&op(&id), &op(&id), 3, 0.0, 10, 1).is_err());
}

#[test]
fn lanczos_agrees_with_dense() {
    for (n, seed) in [(60, 1), (200, 2), (400, 3)] {
        let a = random_spd(n, seed, 1e4);
        let g = random_spd(n, seed + 100, 50.0);
        let d = dense_kappa(&g, &a, 1000).unwrap();
        let l = lanczos_kappa(&op(&g), &op(&a), n, DEFAULT_TOL, DEFAULT_MAX_ITERS, 11).unwrap();
        assert!((l.kappa - d.kappa).abs() <= 0.01 * d.kappa, "{} {}", l.kappa, d.kappa);
        assert!(l.lambda_min >= d.lambda_min * (1.0 - 1e-10) && l.lambda_max <= d.lambda_max * (1.0 + 1e-10));
    }
}

#[test]
fn seed_change_stays_within_tolerance() {
    let a = random_spd(120, 5, 1e3);
    let g = random_spd(120, 6, 20.0);
    let k1 = lanczos_kappa(&op(&g), &op(&a), 120, 1e-8, 300, 1).unwrap();
    let k2 = lanczos_kappa(&op(&g), &op(&a), 120, 1e-8, 300, 2).unwrap();
    assert!(k1.converged && k2.converged);
    assert!((k1.kappa - k2.kappa).abs() <= 1e-6 * k1.kappa);
    let k3 = lanczos_kappa(&op(&g), &op(&a), 120, 1e-8, 300, 1).unwrap();
    assert_eq!(k1, k3);
}

#[test]
fn non_convergence_is_flagged() {
    let a = random_spd(200, 9, 1e6);
    let g = DMatrix::identity(200, 200);
    let r = lanczos_kappa(&op(&g), &op(&a), 200, 1e-14, 3, 1).unwrap();
    assert!(!r.converged);
    assert_eq!(r.iterations, 3);
}

#[test]
fn csv_row_fields() {
    let r = dense_kappa(&DMatrix::identity(2, 2), &DMatrix::identity(2, 2), 10).unwrap();
    let row = r.csv_row();
    assert_eq!(row.split(',').count(), CSV_HEADER.split(',').count());
    assert!(row.starts_with("dense,2,0,"));
}

#[test]
fn tridiagonal_extremes_match_dense() {
    let alpha = [2.0, -1.0, 3.5, 0.25, 1.0];
    let beta = [0.5, 1.5, -0.7, 2.0];
    let t = DMatrix::from_fn(5, 5, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let ev = t.symmetric_eigenvalues();
    let (lo, hi) = tridiagonal_extremes(&alpha, &beta);
    assert!((lo - ev.min()).abs() < 1e-13 && (hi - ev.max()).abs() < 1e-13);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn ritz_extremes_are_monotone(seed in 0u64..1000, n in 10usize..80) {
        let a = random_spd(n, seed, 1e3);
        let g = random_spd(n, seed + 1, 30.0);
        let r = lanczos_kappa(&op(&g), &op(&a), n, 1e-10, n, seed).unwrap();
        let d = dense_kappa(&g, &a, 1000).unwrap();
        for w in r.history.windows(2) {
            prop_assert!(w[1].0 <= w[0].0 * (1.0 + 1e-12));
            prop_assert!(w[1].1 >= w[0].1 * (1.0 - 1e-12));
        }
        prop_assert!(r.lambda_min >= d.lambda_min * (1.0 - 1e-10));
        prop_assert!(r.lambda_max <= d.lambda_max * (1.0 + 1e-10));
    }

    #[test]
    fn kappa_invariant_under_diagonal_rescaling(seed in 0u64..1000) {
        let n = 40;
        let a = random_spd(n, seed, 1e2);
        let g = random_spd(n, seed + 7, 10.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
        // basis ξ_j → c_j ξ_j: A → C A C, G → C⁻¹ G C⁻¹
        let a2 = DMatrix::from_fn(n, n, |i, j| c[i] * a[(i, j)] * c[j]);
        let g2 = DMatrix::from_fn(n, n, |i, j| g[(i, j)] / (c[i] * c[j]));
        let e1 = dense_spectrum(&g, &a, 100).unwrap();
        let e2 = dense_spectrum(&g2, &a2, 100).unwrap();
        for (x, y) in e1.iter().zip(&e2) {
            prop_assert!((x - y).abs() <= 1e-10 * x.abs());
        }
    }
}
