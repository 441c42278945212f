//! Galerkin single layer and hypersingular operators of the 2D Laplacian on
//! closed polygonal curves with straight panels.
//!
//! Panel pairs are split into three classes. Identical and vertex-sharing
//! pairs integrate the inner variable analytically against monomials and
//! the outer variable with Gauss rules graded towards the singular end
//! points. Nearby pairs use composite tensor Gauss on sub-panels no longer
//! than their distance, separated pairs plain tensor Gauss.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::discretization::{DofLayout, SpaceKind};
use crate::linalg::gauss::gauss_legendre;
use crate::mesh::{MeshCombinatorics, SimplicialMesh};
use crate::{Error, Result};

const GRADING: f64 = 0.3;
const GRADING_LEVELS: usize = 28;
const GRADED_POINTS: usize = 12;

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: [f64; 2],
    e: [f64; 2],
    len: f64,
    verts: [usize; 2],
}

impl Panel {
    fn at(&self, t: f64) -> [f64; 2] {
        [self.a[0] + t * self.e[0], self.a[1] + t * self.e[1]]
    }
}

fn panels(mesh: &SimplicialMesh) -> Result<Vec<Panel>> {
    if mesh.dim() != 1 || mesh.embed_dim() != 2 {
        return Err(Error::Unsupported("single layer backend needs a curve in the plane".into()));
    }
    if !mesh.dirichlet_faces().is_empty() {
        return Err(Error::Unsupported("single layer backend needs γ = ∅".into()));
    }
    let mut count = vec![0usize; mesh.n_vertices()];
    mesh.cells().iter().for_each(|&v| count[v] += 1);
    if count.iter().any(|&k| k != 2) {
        return Err(Error::Unsupported("open curves are not supported by the single layer backend".into()));
    }
    Ok((0..mesh.n_cells())
        .map(|c| {
            let v = mesh.cell(c);
            let (p, q) = (mesh.vertex(v[0]), mesh.vertex(v[1]));
            let e = [q[0] - p[0], q[1] - p[1]];
            Panel { a: [p[0], p[1]], e, len: e[0].hypot(e[1]), verts: [v[0], v[1]] }
        })
        .collect())
}

/// `C(n, k)` for small arguments.
fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Antiderivative of `v^m log(v² + c²)`.
fn log_antiderivative(m: usize, v: f64, c: f64) -> f64 {
    let m1 = (m + 1) as f64;
    if c == 0.0 {
        if v == 0.0 {
            return 0.0;
        }
        return 2.0 * v.powi(m as i32 + 1) / m1 * (v.abs().ln() - 1.0 / m1);
    }
    // K_n = ∫ v^n / (v² + c²)
    let r2 = v * v + c * c;
    let mut k = vec![0.0; m + 3];
    k[0] = (v / c).atan() / c;
    k[1] = 0.5 * r2.ln();
    for n in 2..m + 3 {
        k[n] = v.powi(n as i32 - 1) / (n - 1) as f64 - c * c * k[n - 2];
    }
    v.powi(m as i32 + 1) * r2.ln() / m1 - 2.0 / m1 * k[m + 2]
}

/// `∫_{-1/2}^{1/2} w^k log|x − y(w)| dw` for `k ≤ kmax`, where `y` runs over
/// a panel of length `len` and `x` has panel coordinate `s0` (along, in
/// units of `len`) and distance `c·len` from its line.
fn inner_moments(s0: f64, c: f64, len: f64, kmax: usize, out: &mut [f64]) {
    let st = s0 - 0.5;
    let (v0, v1) = (-0.5 - st, 0.5 - st);
    let n: Vec<f64> = (0..=kmax).map(|m| log_antiderivative(m, v1, c) - log_antiderivative(m, v0, c)).collect();
    let ll = len.ln();
    for k in 0..=kmax {
        let plain = if k % 2 == 1 { 0.0 } else { 2.0 * 0.5f64.powi(k as i32 + 1) / (k + 1) as f64 };
        let mut s = 0.0;
        for m in 0..=k {
            s += binom(k, m) * st.powi((k - m) as i32) * n[m];
        }
        out[k] = ll * plain + 0.5 * s;
    }
}

/// Composite Gauss rule on `[0, 1]` graded geometrically towards the end
/// points flagged in `ends`.
fn graded_rule(ends: [bool; 2]) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(GRADED_POINTS);
    let mut pieces: Vec<(f64, f64)> = Vec::new();
    let graded_half = |pieces: &mut Vec<(f64, f64)>, lo: f64, hi: f64, towards_lo: bool| {
        let len = hi - lo;
        let mut bounds = vec![0.0];
        for k in (0..GRADING_LEVELS).rev() {
            bounds.push(GRADING.powi(k as i32 + 1));
        }
        bounds.push(1.0);
        for win in bounds.windows(2) {
            let (a, b) = if towards_lo {
                (lo + win[0] * len, lo + win[1] * len)
            } else {
                (hi - win[1] * len, hi - win[0] * len)
            };
            pieces.push((a, b));
        }
    };
    match ends {
        [true, true] => {
            graded_half(&mut pieces, 0.0, 0.5, true);
            graded_half(&mut pieces, 0.5, 1.0, false);
        }
        [true, false] => graded_half(&mut pieces, 0.0, 1.0, true),
        [false, true] => graded_half(&mut pieces, 0.0, 1.0, false),
        [false, false] => pieces.push((0.0, 1.0)),
    }
    let mut out = Vec::new();
    for (a, b) in pieces {
        for k in 0..x.len() {
            out.push((a + (b - a) * x[k], (b - a) * w[k]));
        }
    }
    out
}

/// `∫∫ log|x(t) − y(u)| w1^k w2^m dt du` over parameter squares, with
/// centered monomials `w = t − 1/2`, for an outer panel (rows) and an inner
/// panel (columns) sharing a vertex or identical.
fn singular_block(outer: &Panel, inner: &Panel, same: bool, kmax: usize) -> DMatrix<f64> {
    let ends = if same {
        [true, true]
    } else {
        let shared0 = outer.verts[0] == inner.verts[0] || outer.verts[0] == inner.verts[1];
        let shared1 = outer.verts[1] == inner.verts[0] || outer.verts[1] == inner.verts[1];
        [shared0, shared1]
    };
    let rule = graded_rule(ends);
    let mut block = DMatrix::zeros(kmax + 1, kmax + 1);
    let mut mu = vec![0.0; kmax + 1];
    let l2 = inner.len * inner.len;
    for &(t, w) in &rule {
        let (s0, c) = if same {
            (t, 0.0)
        } else {
            let x = outer.at(t);
            let r = [x[0] - inner.a[0], x[1] - inner.a[1]];
            let along = (r[0] * inner.e[0] + r[1] * inner.e[1]) / l2;
            let perp = (r[0] * inner.e[1] - r[1] * inner.e[0]).abs() / l2;
            (along, perp)
        };
        inner_moments(s0, c, inner.len, kmax, &mut mu);
        let wc = t - 0.5;
        for k in 0..=kmax {
            let f = w * wc.powi(k as i32);
            for m in 0..=kmax {
                block[(k, m)] += f * mu[m];
            }
        }
    }
    block
}

/// Tensor Gauss block with `n` points per (sub)panel and `split` equal
/// sub-panels per panel.
fn tensor_block(p: &Panel, q: &Panel, n: usize, split: usize, kmax: usize) -> DMatrix<f64> {
    let (x, w) = gauss_legendre(n);
    let h = 1.0 / split as f64;
    let nodes: Vec<(f64, f64)> =
        (0..split).flat_map(|s| x.iter().zip(&w).map(move |(xi, wi)| ((s as f64 + xi) * h, wi * h))).collect();
    let qp: Vec<([f64; 2], f64, f64)> = nodes.iter().map(|&(u, wu)| (q.at(u), wu, u - 0.5)).collect();
    let mut block = DMatrix::zeros(kmax + 1, kmax + 1);
    let mut inner = vec![0.0; kmax + 1];
    for &(t, wt) in &nodes {
        let xp = p.at(t);
        inner.iter_mut().for_each(|v| *v = 0.0);
        for &(y, wu, uc) in &qp {
            let g = wu * (xp[0] - y[0]).hypot(xp[1] - y[1]).ln();
            let mut pw = 1.0;
            for v in inner.iter_mut() {
                *v += g * pw;
                pw *= uc;
            }
        }
        let tc = t - 0.5;
        let mut pw = wt;
        for k in 0..=kmax {
            for m in 0..=kmax {
                block[(k, m)] += pw * inner[m];
            }
            pw *= tc;
        }
    }
    block
}

fn segment_distance(p: &Panel, q: &Panel) -> f64 {
    let point_seg = |x: [f64; 2], s: &Panel| {
        let r = [x[0] - s.a[0], x[1] - s.a[1]];
        let t = ((r[0] * s.e[0] + r[1] * s.e[1]) / (s.len * s.len)).clamp(0.0, 1.0);
        let y = s.at(t);
        (x[0] - y[0]).hypot(x[1] - y[1])
    };
    point_seg(p.at(0.0), q).min(point_seg(p.at(1.0), q)).min(point_seg(q.at(0.0), p)).min(point_seg(q.at(1.0), p))
}

/// Monomial block `∫∫ log|x − y| w1^k w2^m` for panels `p` (rows) and `q`.
fn monomial_block(p: &Panel, q: &Panel, same: bool, kmax: usize) -> DMatrix<f64> {
    let touching = p.verts.iter().any(|v| q.verts.contains(v));
    if same || touching {
        // the longer panel is integrated analytically
        return if same || q.len >= p.len {
            singular_block(p, q, same, kmax)
        } else {
            singular_block(q, p, false, kmax).transpose()
        };
    }
    let size = p.len.max(q.len);
    let r = segment_distance(p, q) / size;
    let extra = kmax.div_ceil(2);
    if r >= 4.0 {
        tensor_block(p, q, 6 + extra, 1, kmax)
    } else if r >= 2.0 {
        tensor_block(p, q, 8 + extra, 1, kmax)
    } else if r >= 1.0 {
        tensor_block(p, q, 10 + extra, 1, kmax)
    } else {
        let split = ((1.0 / r).ceil() as usize).min(64);
        tensor_block(p, q, 10 + extra, split, kmax)
    }
}

/// Dense Galerkin matrix of `V u(x) = −(1/2π) ∫ log|x − y| u(y) ds_y` on a
/// discontinuous layout. Exactly symmetric by construction.
pub fn assemble_single_layer_curve(mesh: &SimplicialMesh, layout: &DofLayout) -> Result<DMatrix<f64>> {
    let pans = panels(mesh)?;
    if layout.kind != SpaceKind::DiscPoly || layout.dim != 1 {
        return Err(Error::Unsupported("single layer backend needs a discontinuous trial space".into()));
    }
    let basis = layout.local_basis().expect("discontinuous layout has a local basis");
    let kmax = basis.degree;
    let coeffs = &basis.coeffs;
    let nc = pans.len();
    let scale = -1.0 / (2.0 * PI);
    let blocks: Vec<Vec<DMatrix<f64>>> = (0..nc)
        .into_par_iter()
        .map(|i| {
            (i..nc)
                .map(|j| {
                    let mono = monomial_block(&pans[i], &pans[j], i == j, kmax);
                    coeffs * mono * coeffs.transpose() * (scale * pans[i].len * pans[j].len)
                })
                .collect()
        })
        .collect();
    let n = layout.n_dofs();
    let mut a = DMatrix::zeros(n, n);
    for (i, row) in blocks.iter().enumerate() {
        let di = layout.cell_dofs(i);
        for (off, b) in row.iter().enumerate() {
            let j = i + off;
            let dj = layout.cell_dofs(j);
            for (k, &r) in di.iter().enumerate() {
                for (m, &c) in dj.iter().enumerate() {
                    let v = if i == j { 0.5 * (b[(k, m)] + b[(m, k)]) } else { b[(k, m)] };
                    a[(r, c)] = v;
                    a[(c, r)] = v;
                }
            }
        }
    }
    Ok(a)
}

/// Arclength derivatives of the free vertex hats: `G[T, ν] = ±1/|T|`.
pub fn hat_derivatives(mesh: &SimplicialMesh, comb: &MeshCombinatorics) -> DMatrix<f64> {
    let mut g = DMatrix::zeros(mesh.n_cells(), comb.free_vertices.len());
    for c in 0..mesh.n_cells() {
        let v = mesh.cell(c);
        let inv = 1.0 / comb.volume[c];
        if let Some(j) = comb.free_index[v[0]] {
            g[(c, j)] -= inv;
        }
        if let Some(j) = comb.free_index[v[1]] {
            g[(c, j)] += inv;
        }
    }
    g
}

/// Hypersingular operator on the hats of a closed curve through
/// `⟨W u, v⟩ = ⟨V u', v'⟩`. Positive semidefinite with the constants as
/// kernel.
pub fn assemble_hypersingular_curve(mesh: &SimplicialMesh, comb: &MeshCombinatorics) -> Result<DMatrix<f64>> {
    let layout = crate::discretization::dof_layout(mesh, SpaceKind::DiscPoly, 0)?;
    let v0 = assemble_single_layer_curve(mesh, &layout)?;
    let g = hat_derivatives(mesh, comb);
    let b = g.transpose() * (v0 * &g);
    Ok((&b + b.transpose()) * 0.5)
}

/// `B^S = B̃ + α m mᵀ` with `m_ν = ⟨φ_ν, 1⟩`.
pub fn adapt_hypersingular(b: &DMatrix<f64>, alpha: f64, mass_with_one: &[f64]) -> Result<DMatrix<f64>> {
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    if b.nrows() != mass_with_one.len() || b.ncols() != mass_with_one.len() {
        return Err(Error::DimensionMismatch { expected: b.nrows(), got: mass_with_one.len() });
    }
    let mut out = b.clone();
    for i in 0..b.nrows() {
        for j in 0..b.ncols() {
            out[(i, j)] += alpha * mass_with_one[i] * mass_with_one[j];
        }
    }
    Ok(out)
}
