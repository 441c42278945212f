//! Preconditioners as explicit factors.
//!
//! Lowest order: `G = D⁻¹ (pᵀ B^S p + qᵀ B^B q) D⁻¹` with `D` diagonal.
//! Higher order by operator preconditioning:
//! `G = D⁻¹ [I Rᵀ; 0 I] blockdiag(B⁰, H) [I 0; R I] D⁻¹`, and for
//! continuous spaces by subspace correction:
//! `G = [I S; 0 I] blockdiag(G⁰, W) [I 0; Sᵀ I]`.
//! Lowest-order dofs always precede higher-order ones.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::discretization::{
    cont1_coefficients, disc0_coefficients, local_orthogonality_defect, support_measure, weighted_norms_sq,
    DofLayout, SpaceKind,
};
use crate::io::{write_coo, write_diag};
use crate::linalg::{CsrMatrix, LinearOperator};
use crate::mesh::{MeshCombinatorics, SimplicialMesh};
use crate::{Error, Result};

/// β for uniform refinement.
pub const BETA_UNIFORM: f64 = 1.25;
/// β for local refinement.
pub const BETA_LOCAL: f64 = 1.2;
/// Largest local Gram defect accepted as "orthogonal".
pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Disc0,
    Cont1,
    DiscHighOpp,
    DiscHighSsc,
    ContHighOpp,
    ContHighSsc,
    Jacobi,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Disc0 => "disc0",
            Variant::Cont1 => "cont1",
            Variant::DiscHighOpp => "disc_high_opp",
            Variant::DiscHighSsc => "disc_high_ssc",
            Variant::ContHighOpp => "cont_high_opp",
            Variant::ContHighSsc => "cont_high_ssc",
            Variant::Jacobi => "jacobi",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecondSpec {
    pub variant: Variant,
    pub s: f64,
    pub beta: f64,
}

/// Higher-order part of the factors.
#[derive(Clone)]
pub enum HighBlock {
    /// `D¹`, centre diagonal `H` and optional coupling `R` (higher × lowest).
    Opp { d1: Vec<f64>, h: Vec<f64>, r: Option<CsrMatrix> },
    /// Centre diagonal `W` and coupling `S` (lowest × higher).
    Ssc { w: Vec<f64>, s: CsrMatrix },
}

#[derive(Clone)]
pub struct PrecondFactors {
    pub variant: Variant,
    /// `D⁰` on the lowest-order block.
    pub d: Vec<f64>,
    /// Free vertices × lowest-order dofs.
    pub p: CsrMatrix,
    /// Bubbles × lowest-order dofs.
    pub q: CsrMatrix,
    /// `B^B` on the bubbles.
    pub bb: Vec<f64>,
    pub bs: Option<Arc<dyn LinearOperator>>,
    pub high: Option<HighBlock>,
    /// `diag(A)⁻¹` for the Jacobi variant.
    jacobi: Option<Vec<f64>>,
}

/// Work counters of one application.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ApplyStats {
    /// Stored sparse entries traversed, `B^S` excluded.
    pub sparse_nnz: usize,
    /// Diagonal scalings, counted per entry.
    pub diagonal_ops: usize,
    pub bs_applications: usize,
}

impl ApplyStats {
    pub fn total(&self) -> usize {
        self.sparse_nnz + self.diagonal_ops
    }
}

fn check_beta_s(s: f64, beta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidArgument(format!("s must lie in [0, 1], got {s}")));
    }
    if beta.is_nan() || beta <= 0.0 {
        return Err(Error::InvalidArgument(format!("beta must be positive, got {beta}")));
    }
    Ok(())
}

fn check_bs(bs: &dyn LinearOperator, n_free: usize) -> Result<()> {
    if bs.nrows() != n_free || bs.ncols() != n_free {
        return Err(Error::DimensionMismatch { expected: n_free, got: bs.nrows() });
    }
    Ok(())
}

/// Piecewise constants.
pub fn build_disc0(comb: &MeshCombinatorics, bs: Arc<dyn LinearOperator>, s: f64, beta: f64) -> Result<PrecondFactors> {
    check_beta_s(s, beta)?;
    check_bs(bs.as_ref(), comb.free_vertices.len())?;
    let dual = disc0_coefficients(comb);
    let e = 1.0 - 2.0 * s / comb.dim as f64;
    let d = comb.volume.clone();
    let bb = d.iter().map(|v| beta * v.powf(e)).collect();
    Ok(PrecondFactors {
        variant: Variant::Disc0,
        d,
        p: dual.phi,
        q: dual.theta,
        bb,
        bs: Some(bs),
        high: None,
        jacobi: None,
    })
}

/// Continuous piecewise linears; dofs are all vertices.
pub fn build_cont1(comb: &MeshCombinatorics, bs: Arc<dyn LinearOperator>, s: f64, beta: f64) -> Result<PrecondFactors> {
    check_beta_s(s, beta)?;
    check_bs(bs.as_ref(), comb.free_vertices.len())?;
    let dual = cont1_coefficients(comb);
    let dd = comb.dim as f64;
    let e = 1.0 - 2.0 * s / dd;
    let d = comb.patch_volume.iter().map(|w| w / (dd + 1.0)).collect();
    let bb = comb.patch_volume.iter().map(|w| beta * w.powf(e)).collect();
    Ok(PrecondFactors {
        variant: Variant::Cont1,
        d,
        p: dual.phi,
        q: dual.theta,
        bb,
        bs: Some(bs),
        high: None,
        jacobi: None,
    })
}

fn lowest(comb: &MeshCombinatorics, layout: &DofLayout, bs: Arc<dyn LinearOperator>, s: f64, beta: f64) -> Result<PrecondFactors> {
    match layout.kind {
        SpaceKind::DiscPoly if layout.degree >= 1 => build_disc0(comb, bs, s, beta),
        SpaceKind::ContPoly if layout.degree >= 2 => build_cont1(comb, bs, s, beta),
        _ => Err(Error::Unsupported(format!(
            "higher-order preconditioner for {:?} of degree {}",
            layout.kind, layout.degree
        ))),
    }
}

fn check_mixed(comb: &MeshCombinatorics, layout: &DofLayout, mixed: &CsrMatrix) -> Result<()> {
    if mixed.nrows() != comb.free_vertices.len() || mixed.ncols() != layout.n_dofs() {
        return Err(Error::DimensionMismatch { expected: layout.n_dofs(), got: mixed.ncols() });
    }
    let lowest_ok = match layout.kind {
        SpaceKind::DiscPoly => (0..comb.n_cells).all(|c| layout.cell_dofs(c)[0] == c),
        _ => (0..comb.n_vertices).all(|v| layout.support(v) == comb.vertex_cells[v].as_slice()),
    };
    if !lowest_ok || layout.n_lowest() >= layout.n_dofs() {
        return Err(Error::InvalidArgument("lowest-order dofs must precede higher-order dofs".into()));
    }
    Ok(())
}

/// The coupling `R` (higher × lowest).
fn coupling_r(comb: &MeshCombinatorics, layout: &DofLayout, mixed: &CsrMatrix) -> CsrMatrix {
    let n0 = layout.n_lowest();
    let nh = layout.n_higher();
    let mut t = Vec::new();
    match layout.kind {
        SpaceKind::DiscPoly => {
            // R_{(T',i'),T} = −|T'|⁻¹ Σ_{ν ∈ N⁰_T ∩ N⁰_T'} d_ν⁻¹ ⟨φ_ν, ξ_{T',i'}⟩
            for tp in 0..comb.n_cells {
                let higher = &layout.cell_dofs(tp)[1..];
                for tt in comb.neighbors(tp) {
                    for &h in higher {
                        let mut sum = 0.0;
                        for v in comb.free_vertices_of(tt) {
                            if comb.cell(tp).contains(&v) {
                                let row = comb.free_index[v].unwrap();
                                sum += mixed.get(row, h) / comb.valence[v] as f64;
                            }
                        }
                        if sum != 0.0 {
                            t.push((h - n0, tt, -sum / comb.volume[tp]));
                        }
                    }
                }
            }
        }
        _ => {
            // R_{ξ,ν} = −|supp ξ|⁻¹ ⟨φ_ν, ξ⟩ on free vertices
            let supp = support_measure(comb, layout);
            let mt = mixed.transpose();
            for h in n0..layout.n_dofs() {
                for (row, v) in mt.row(h) {
                    if v != 0.0 {
                        t.push((h - n0, comb.free_vertices[row], -v / supp[h]));
                    }
                }
            }
        }
    }
    CsrMatrix::from_triplets(nh, n0, &t)
}

/// Higher order by operator preconditioning. With `zero_r` the coupling
/// block is dropped.
pub fn build_high_opp(
    comb: &MeshCombinatorics,
    layout: &DofLayout,
    mixed: &CsrMatrix,
    bs: Arc<dyn LinearOperator>,
    s: f64,
    beta: f64,
) -> Result<PrecondFactors> {
    high_opp(comb, layout, mixed, bs, s, beta, false)
}

fn high_opp(
    comb: &MeshCombinatorics,
    layout: &DofLayout,
    mixed: &CsrMatrix,
    bs: Arc<dyn LinearOperator>,
    s: f64,
    beta: f64,
    zero_r: bool,
) -> Result<PrecondFactors> {
    let mut f = lowest(comb, layout, bs, s, beta)?;
    check_mixed(comb, layout, mixed)?;
    let n0 = layout.n_lowest();
    let e = 1.0 - 2.0 * s / comb.dim as f64;
    let d1: Vec<f64> = match layout.kind {
        SpaceKind::DiscPoly => (n0..layout.n_dofs()).map(|h| comb.volume[layout.support(h)[0]]).collect(),
        _ => support_measure(comb, layout)[n0..].to_vec(),
    };
    let h = d1.iter().map(|v| beta * v.powf(e)).collect();
    let r = if zero_r { None } else { Some(coupling_r(comb, layout, mixed)) };
    f.variant = if layout.kind == SpaceKind::DiscPoly { Variant::DiscHighOpp } else { Variant::ContHighOpp };
    f.high = Some(HighBlock::Opp { d1, h, r });
    Ok(f)
}

/// Higher order by subspace correction.
pub fn build_high_ssc(
    mesh: &SimplicialMesh,
    comb: &MeshCombinatorics,
    layout: &DofLayout,
    mixed: &CsrMatrix,
    bs: Arc<dyn LinearOperator>,
    s: f64,
    beta: f64,
) -> Result<PrecondFactors> {
    match layout.kind {
        SpaceKind::DiscPoly => {
            let defect = local_orthogonality_defect(layout);
            if defect > ORTHOGONALITY_TOLERANCE {
                return Err(Error::InvalidArgument(format!(
                    "subspace correction needs a locally orthogonal basis (defect {defect:.2e})"
                )));
            }
            let mut f = high_opp(comb, layout, mixed, bs, s, beta, true)?;
            f.variant = Variant::DiscHighSsc;
            Ok(f)
        }
        _ => {
            let mut f = lowest(comb, layout, bs, s, beta)?;
            check_mixed(comb, layout, mixed)?;
            let n0 = layout.n_lowest();
            let dd = comb.dim as f64;
            let w = weighted_norms_sq(mesh, comb, layout, s)[n0..].iter().map(|v| 1.0 / v).collect();
            // S_{νξ} = −(d+1) ⟨φ_ν, ξ⟩ / |ω(ν)| on free vertices
            let mut t = Vec::new();
            for (row, v) in comb.free_vertices.iter().enumerate() {
                for (h, m) in mixed.row(row) {
                    if h >= n0 && m != 0.0 {
                        t.push((*v, h - n0, -(dd + 1.0) * m / comb.patch_volume[*v]));
                    }
                }
            }
            let s_mat = CsrMatrix::from_triplets(n0, layout.n_higher(), &t);
            f.variant = Variant::ContHighSsc;
            f.high = Some(HighBlock::Ssc { w, s: s_mat });
            Ok(f)
        }
    }
}

/// `G = diag(A)⁻¹`.
pub fn build_jacobi(a: &DMatrix<f64>) -> Result<PrecondFactors> {
    let n = a.nrows();
    let mut inv = Vec::with_capacity(n);
    for i in 0..n {
        let v = a[(i, i)];
        if v.is_nan() || v <= 0.0 {
            return Err(Error::InvalidArgument(format!("diagonal entry {i} is not positive: {v}")));
        }
        inv.push(1.0 / v);
    }
    Ok(PrecondFactors {
        variant: Variant::Jacobi,
        d: vec![],
        p: CsrMatrix::zeros(0, 0),
        q: CsrMatrix::zeros(0, 0),
        bb: vec![],
        bs: None,
        high: None,
        jacobi: Some(inv),
    })
}

/// Builds the variant named in `spec` for the given trial layout.
#[allow(clippy::too_many_arguments)]
pub fn build(
    spec: &PrecondSpec,
    mesh: &SimplicialMesh,
    comb: &MeshCombinatorics,
    layout: &DofLayout,
    a: &DMatrix<f64>,
    bs: Arc<dyn LinearOperator>,
) -> Result<PrecondFactors> {
    let mixed = || crate::discretization::assemble_mixed_mass(mesh, comb, layout);
    let kind_ok = match spec.variant {
        Variant::Disc0 => layout.kind == SpaceKind::DiscPoly && layout.degree == 0,
        Variant::Cont1 => layout.kind == SpaceKind::ContLinear,
        Variant::DiscHighOpp | Variant::DiscHighSsc => layout.kind == SpaceKind::DiscPoly && layout.degree > 0,
        Variant::ContHighOpp | Variant::ContHighSsc => layout.kind == SpaceKind::ContPoly,
        Variant::Jacobi => true,
    };
    if !kind_ok {
        return Err(Error::InvalidArgument(format!(
            "variant {} does not fit a {:?} space of degree {}",
            spec.variant.name(),
            layout.kind,
            layout.degree
        )));
    }
    match spec.variant {
        Variant::Disc0 => build_disc0(comb, bs, spec.s, spec.beta),
        Variant::Cont1 => build_cont1(comb, bs, spec.s, spec.beta),
        Variant::DiscHighOpp | Variant::ContHighOpp => build_high_opp(comb, layout, &mixed()?, bs, spec.s, spec.beta),
        Variant::DiscHighSsc | Variant::ContHighSsc => {
            build_high_ssc(mesh, comb, layout, &mixed()?, bs, spec.s, spec.beta)
        }
        Variant::Jacobi => build_jacobi(a),
    }
}

impl PrecondFactors {
    /// Number of trial dofs.
    pub fn n(&self) -> usize {
        if let Some(j) = &self.jacobi {
            return j.len();
        }
        self.d.len() + self.n_high()
    }

    fn n_high(&self) -> usize {
        match &self.high {
            Some(HighBlock::Opp { d1, .. }) => d1.len(),
            Some(HighBlock::Ssc { w, .. }) => w.len(),
            None => 0,
        }
    }

    /// `B⁰ y = pᵀ B^S p y + qᵀ B^B q y` on the lowest block.
    fn apply_b0(&self, y: &[f64], st: &mut ApplyStats) -> Vec<f64> {
        let bs = self.bs.as_ref().expect("operator factors carry B^S");
        let nf = self.p.nrows();
        let mut py = vec![0.0; nf];
        self.p.matvec(y, &mut py);
        let mut bpy = vec![0.0; nf];
        if nf > 0 {
            bs.apply(&py, &mut bpy);
            st.bs_applications += 1;
        }
        let mut out = vec![0.0; y.len()];
        self.p.matvec_t(&bpy, &mut out);
        let mut qy = vec![0.0; self.q.nrows()];
        self.q.matvec(y, &mut qy);
        for (v, b) in qy.iter_mut().zip(&self.bb) {
            *v *= b;
        }
        let mut qt = vec![0.0; y.len()];
        self.q.matvec_t(&qy, &mut qt);
        for (o, v) in out.iter_mut().zip(&qt) {
            *o += v;
        }
        st.sparse_nnz += 2 * (self.p.nnz() + self.q.nnz());
        st.diagonal_ops += self.bb.len() + y.len();
        out
    }

    /// `G⁰ y = D⁻¹ B⁰ D⁻¹ y`.
    fn apply_g0(&self, r: &[f64], st: &mut ApplyStats) -> Vec<f64> {
        let y: Vec<f64> = r.iter().zip(&self.d).map(|(v, d)| v / d).collect();
        let z = self.apply_b0(&y, st);
        st.diagonal_ops += 2 * r.len();
        z.iter().zip(&self.d).map(|(v, d)| v / d).collect()
    }

    /// `G r`, with work counters.
    pub fn apply_with_stats(&self, r: &[f64]) -> Result<(Vec<f64>, ApplyStats)> {
        let n = self.n();
        if r.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: r.len() });
        }
        let mut st = ApplyStats::default();
        if let Some(j) = &self.jacobi {
            st.diagonal_ops = n;
            return Ok((r.iter().zip(j).map(|(a, b)| a * b).collect(), st));
        }
        let n0 = self.d.len();
        let out = match &self.high {
            None => self.apply_g0(r, &mut st),
            Some(HighBlock::Opp { d1, h, r: coupling }) => {
                let y0: Vec<f64> = r[..n0].iter().zip(&self.d).map(|(v, d)| v / d).collect();
                let mut y1: Vec<f64> = r[n0..].iter().zip(d1).map(|(v, d)| v / d).collect();
                if let Some(rm) = coupling {
                    let mut ry = vec![0.0; y1.len()];
                    rm.matvec(&y0, &mut ry);
                    y1.iter_mut().zip(&ry).for_each(|(a, b)| *a += b);
                    st.sparse_nnz += rm.nnz();
                }
                let mut z0 = self.apply_b0(&y0, &mut st);
                let z1: Vec<f64> = y1.iter().zip(h).map(|(a, b)| a * b).collect();
                if let Some(rm) = coupling {
                    let mut rt = vec![0.0; n0];
                    rm.matvec_t(&z1, &mut rt);
                    z0.iter_mut().zip(&rt).for_each(|(a, b)| *a += b);
                    st.sparse_nnz += rm.nnz();
                }
                st.diagonal_ops += 2 * n + h.len();
                let mut out: Vec<f64> = z0.iter().zip(&self.d).map(|(v, d)| v / d).collect();
                out.extend(z1.iter().zip(d1).map(|(v, d)| v / d));
                out
            }
            Some(HighBlock::Ssc { w, s }) => {
                let r0 = &r[..n0];
                let mut u1 = r[n0..].to_vec();
                let mut st_r = vec![0.0; u1.len()];
                s.matvec_t(r0, &mut st_r);
                u1.iter_mut().zip(&st_r).for_each(|(a, b)| *a += b);
                let mut z0 = self.apply_g0(r0, &mut st);
                let z1: Vec<f64> = u1.iter().zip(w).map(|(a, b)| a * b).collect();
                let mut sz = vec![0.0; n0];
                s.matvec(&z1, &mut sz);
                z0.iter_mut().zip(&sz).for_each(|(a, b)| *a += b);
                st.sparse_nnz += 2 * s.nnz();
                st.diagonal_ops += w.len();
                z0.extend(z1);
                z0
            }
        };
        Ok((out, st))
    }

    /// `G r`.
    pub fn apply(&self, r: &[f64]) -> Result<Vec<f64>> {
        self.apply_with_stats(r).map(|(v, _)| v)
    }

    /// Dense `G` by explicit matrix products (oracle for [`Self::apply`]).
    pub fn assemble_dense(&self, max_n: usize) -> Result<DMatrix<f64>> {
        let n = self.n();
        if n > max_n {
            return Err(Error::SizeLimit { n, max: max_n });
        }
        if let Some(j) = &self.jacobi {
            return Ok(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(j)));
        }
        let n0 = self.d.len();
        let p = self.p.to_dense();
        let q = self.q.to_dense();
        let bs = self.bs.as_ref().unwrap().to_dense();
        let bb = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.bb));
        let b0 = p.transpose() * bs * &p + q.transpose() * bb * &q;
        let dinv0 = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n0, self.d.iter().map(|v| 1.0 / v)));
        let g = match &self.high {
            None => &dinv0 * b0 * &dinv0,
            Some(HighBlock::Opp { d1, h, r }) => {
                let nh = d1.len();
                let mut dinv = DMatrix::zeros(n, n);
                let mut centre = DMatrix::zeros(n, n);
                let mut lower = DMatrix::identity(n, n);
                dinv.view_mut((0, 0), (n0, n0)).copy_from(&dinv0);
                centre.view_mut((0, 0), (n0, n0)).copy_from(&b0);
                for k in 0..nh {
                    dinv[(n0 + k, n0 + k)] = 1.0 / d1[k];
                    centre[(n0 + k, n0 + k)] = h[k];
                }
                if let Some(rm) = r {
                    lower.view_mut((n0, 0), (nh, n0)).copy_from(&rm.to_dense());
                }
                &dinv * lower.transpose() * centre * lower * &dinv
            }
            Some(HighBlock::Ssc { w, s }) => {
                let nh = w.len();
                let mut centre = DMatrix::zeros(n, n);
                let mut upper = DMatrix::identity(n, n);
                centre.view_mut((0, 0), (n0, n0)).copy_from(&(&dinv0 * b0 * &dinv0));
                for k in 0..nh {
                    centre[(n0 + k, n0 + k)] = w[k];
                }
                upper.view_mut((0, n0), (n0, nh)).copy_from(&s.to_dense());
                &upper * centre * upper.transpose()
            }
        };
        Ok(g)
    }

    /// Factors for the rescaled trial basis `c_j ξ_j`: `D` is multiplied by
    /// `c`, so that `G` becomes `C⁻¹ G C⁻¹`.
    pub fn with_trial_scaling(&self, c: &[f64]) -> Result<PrecondFactors> {
        let n = self.n();
        if c.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: c.len() });
        }
        if c.iter().any(|v| v.is_nan() || *v <= 0.0) {
            return Err(Error::InvalidArgument("trial scaling must be positive".into()));
        }
        let mut f = self.clone();
        if let Some(j) = &mut f.jacobi {
            j.iter_mut().zip(c).for_each(|(g, s)| *g /= s * s);
            return Ok(f);
        }
        let n0 = f.d.len();
        f.d.iter_mut().zip(c).for_each(|(d, s)| *d *= s);
        match &mut f.high {
            Some(HighBlock::Opp { d1, .. }) => d1.iter_mut().zip(&c[n0..]).for_each(|(d, s)| *d *= s),
            Some(HighBlock::Ssc { w, s }) => {
                // G⁰ picks up C⁻¹ through D; the rest is conjugated explicitly
                let inv0: Vec<f64> = c[..n0].iter().map(|v| 1.0 / v).collect();
                *s = s.scale_rows(&inv0).scale_cols(&c[n0..]);
                w.iter_mut().zip(&c[n0..]).for_each(|(v, s)| *v /= s * s);
            }
            None => {}
        }
        Ok(f)
    }

    /// Named text exports: `D` and `B^B` (and `D¹`, `H`, `W`) as diagonal
    /// vectors, `p`, `q`, `R`, `S` in coordinate format.
    pub fn export(&self) -> Vec<(&'static str, String)> {
        if let Some(j) = &self.jacobi {
            return vec![("g.diag", write_diag(j))];
        }
        let mut out = vec![
            ("d.diag", write_diag(&self.d)),
            ("bb.diag", write_diag(&self.bb)),
            ("p.coo", write_coo(&self.p)),
            ("q.coo", write_coo(&self.q)),
        ];
        match &self.high {
            Some(HighBlock::Opp { d1, h, r }) => {
                out.push(("d1.diag", write_diag(d1)));
                out.push(("h.diag", write_diag(h)));
                if let Some(r) = r {
                    out.push(("r.coo", write_coo(r)));
                }
            }
            Some(HighBlock::Ssc { w, s }) => {
                out.push(("w.diag", write_diag(w)));
                out.push(("s.coo", write_coo(s)));
            }
            None => {}
        }
        out
    }

    /// The coupling `R`, if any.
    pub fn r(&self) -> Option<&CsrMatrix> {
        match &self.high {
            Some(HighBlock::Opp { r, .. }) => r.as_ref(),
            _ => None,
        }
    }

    /// The coupling `S`, if any.
    pub fn s(&self) -> Option<&CsrMatrix> {
        match &self.high {
            Some(HighBlock::Ssc { s, .. }) => Some(s),
            _ => None,
        }
    }

    /// Same factors with the coupling `R` removed.
    pub fn without_r(&self) -> PrecondFactors {
        let mut f = self.clone();
        if let Some(HighBlock::Opp { r, .. }) = &mut f.high {
            *r = None;
        }
        f
    }
}

#[cfg(test)]
mod tests;
