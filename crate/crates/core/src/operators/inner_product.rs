//! Mesh-dependent inner product with the chart Jacobian frozen to its panel
//! average: `⟨u, v⟩_T = Σ_T w_T ∫_{χ^{-1}(T)} (u∘χ)(v∘χ)`.
//!
//! For the ellipse chart the panel `T` is the chord between two points of
//! the ellipse and `χ` maps the parameter interval onto the chord at
//! constant ellipse arclength speed, so `|χ'|` varies within a panel and
//! the frozen product differs from L2 by `O(h)`.

use nalgebra::DMatrix;

use crate::discretization::{assemble_mass, DofLayout};
use crate::linalg::gauss::gauss_legendre;
use crate::mesh::{ChartKind, SimplicialMesh};
use crate::{Error, Result};

const ARC_POINTS: usize = 16;
const PRODUCT_POINTS: usize = 20;

#[derive(Debug, Clone)]
pub struct MeshInnerProduct {
    kind: ChartKind,
    /// `w_T = |T| / |χ^{-1}(T)|`.
    pub weights: Vec<f64>,
    /// Parameter interval per cell, oriented from local vertex 0 to 1.
    intervals: Vec<[f64; 2]>,
    volumes: Vec<f64>,
}

fn arclength(kind: &ChartKind, t0: f64, t1: f64) -> f64 {
    let (x, w) = gauss_legendre(ARC_POINTS);
    x.iter().zip(&w).map(|(xi, wi)| (t1 - t0) * wi * kind.speed(t0 + (t1 - t0) * xi)).sum()
}

impl MeshInnerProduct {
    /// Uses the chart stored on the mesh, or per-panel affine charts when
    /// the mesh carries none.
    pub fn new(mesh: &SimplicialMesh) -> Result<Self> {
        if mesh.dim() != 1 {
            return Err(Error::Unsupported("chart inner products are implemented for curves".into()));
        }
        let kind = mesh.charts().map(|c| c.kind).unwrap_or(ChartKind::PanelAffine);
        let n = mesh.n_cells();
        let volumes: Vec<f64> = (0..n).map(|c| mesh.volume(c)).collect();
        let mut intervals = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for c in 0..n {
            let iv = match kind {
                ChartKind::PanelAffine => [0.0, volumes[c]],
                ChartKind::Ellipse { .. } => {
                    let p = &mesh.charts().unwrap().params;
                    let v = mesh.cell(c);
                    let (t0, mut t1) = (p[v[0]], p[v[1]]);
                    // shortest way round the closed parameter circle
                    let delta = t1 - t0;
                    t1 = t0 + delta - delta.round();
                    [t0, t1]
                }
            };
            let len = (iv[1] - iv[0]).abs();
            if len <= 0.0 || volumes[c] <= 0.0 {
                return Err(Error::InvalidMesh(format!("degenerate chart on cell {c}")));
            }
            weights.push(volumes[c] / len);
            intervals.push(iv);
        }
        Ok(MeshInnerProduct { kind, weights, intervals, volumes })
    }

    /// Frozen-Jacobian Gram matrix of a trial layout.
    pub fn gram(&self, mesh: &SimplicialMesh, layout: &DofLayout) -> DMatrix<f64> {
        if self.kind == ChartKind::PanelAffine {
            // the affine chart is an isometry: the product is plain L2
            return assemble_mass(mesh, layout).to_dense();
        }
        let nl = layout.n_local();
        let (x, w) = gauss_legendre(PRODUCT_POINTS);
        let mut vals = vec![0.0; nl];
        let n = layout.n_dofs();
        let mut g = DMatrix::zeros(n, n);
        for c in 0..self.weights.len() {
            let [t0, t1] = self.intervals[c];
            let total = arclength(&self.kind, t0, t1);
            let scale = self.weights[c] * (t1 - t0).abs();
            let dofs = layout.cell_dofs(c);
            for k in 0..x.len() {
                let t = t0 + (t1 - t0) * x[k];
                let sigma = arclength(&self.kind, t0, t) / total;
                layout.eval_local(c, &[1.0 - sigma, sigma], &mut vals);
                for i in 0..nl {
                    for j in 0..nl {
                        g[(dofs[i], dofs[j])] += scale * w[k] * vals[i] * vals[j];
                    }
                }
            }
        }
        g
    }

    /// `⟨1, ξ_j⟩_T` for every trial dof.
    pub fn integrals(&self, layout: &DofLayout) -> Vec<f64> {
        let nl = layout.n_local();
        let (x, w) = gauss_legendre(PRODUCT_POINTS);
        let mut vals = vec![0.0; nl];
        let mut out = vec![0.0; layout.n_dofs()];
        for c in 0..self.weights.len() {
            let [t0, t1] = self.intervals[c];
            let scale = self.weights[c] * (t1 - t0).abs();
            let total = arclength(&self.kind, t0, t1);
            for k in 0..x.len() {
                let sigma = match self.kind {
                    ChartKind::PanelAffine => x[k],
                    _ => arclength(&self.kind, t0, t0 + (t1 - t0) * x[k]) / total,
                };
                layout.eval_local(c, &[1.0 - sigma, sigma], &mut vals);
                for i in 0..nl {
                    out[layout.cell_dofs(c)[i]] += scale * w[k] * vals[i];
                }
            }
        }
        out
    }

    /// Largest `|⟨u, v⟩_T − ⟨u, v⟩| / (∥u∥ ∥v∥)` over the trial space, i.e.
    /// the spectral radius of `M^{-1/2} (G_T − M) M^{-1/2}`.
    pub fn deviation_from_l2(&self, mesh: &SimplicialMesh, layout: &DofLayout) -> Result<f64> {
        let m = assemble_mass(mesh, layout).to_dense();
        let g = self.gram(mesh, layout);
        let chol = m.cholesky().ok_or(Error::NotPositiveDefinite)?;
        let linv = chol.l().try_inverse().ok_or(Error::NotPositiveDefinite)?;
        let s = &linv * (g - chol.l() * chol.l().transpose()) * linv.transpose();
        let s = (&s + s.transpose()) * 0.5;
        Ok(s.symmetric_eigenvalues().amax())
    }

    /// Largest panel measure.
    pub fn h_max(&self) -> f64 {
        self.volumes.iter().cloned().fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{dof_layout, SpaceKind};
    use crate::mesh::{make_structured, uniform_refine, DirichletSpec, Geometry};

    #[test]
    fn affine_chart_is_plain_l2() {
        let m = make_structured(Geometry::closed_polygon(5), 2, DirichletSpec::None).unwrap();
        let l = dof_layout(&m, SpaceKind::DiscPoly, 2).unwrap();
        let ip = MeshInnerProduct::new(&m).unwrap();
        assert!(ip.weights.iter().all(|&w| w == 1.0));
        assert_eq!(ip.gram(&m, &l), assemble_mass(&m, &l).to_dense());
    }

    #[test]
    fn frozen_integrals_are_panel_measures() {
        let m = make_structured(Geometry::ellipse(), 12, DirichletSpec::None).unwrap();
        let l = dof_layout(&m, SpaceKind::DiscPoly, 0).unwrap();
        let ip = MeshInnerProduct::new(&m).unwrap();
        for (c, v) in ip.integrals(&l).iter().enumerate() {
            assert!((v - m.volume(c)).abs() < 1e-14 * m.volume(c));
        }
        assert!(ip.weights.iter().all(|&w| w > 0.0));
    }

    #[test]
    fn deviation_shrinks_like_h() {
        let mut m = make_structured(Geometry::ellipse(), 8, DirichletSpec::None).unwrap();
        let mut ratios = Vec::new();
        for _ in 0..4 {
            let l = dof_layout(&m, SpaceKind::DiscPoly, 1).unwrap();
            let ip = MeshInnerProduct::new(&m).unwrap();
            ratios.push(ip.deviation_from_l2(&m, &l).unwrap() / ip.h_max());
            m = uniform_refine(&m);
        }
        let cmax = ratios.iter().cloned().fold(0.0, f64::max);
        assert!(cmax < 10.0 && ratios.last().unwrap() <= &(1.5 * ratios[0]), "{ratios:?}");
    }
}
