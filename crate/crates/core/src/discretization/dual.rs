//! Coefficients of the dual collection Ψ in terms of free-vertex hats Φ and
//! bubbles Θ, plus quadrature checks of biorthogonality.

use super::assembly::assemble_mixed_mass;
use super::bubbles::{bubble_trial_mass, BubbleSet};
use super::layout::{DofLayout, SpaceKind};
use crate::linalg::CsrMatrix;
use crate::mesh::{MeshCombinatorics, SimplicialMesh};
use crate::{Error, Result};

/// `ψ_j = Σ_ν phi[ν, j] φ_ν + Σ_b theta[b, j] θ_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualBasis {
    /// Free vertices × dual functions.
    pub phi: CsrMatrix,
    /// Bubbles × dual functions.
    pub theta: CsrMatrix,
}

/// Dual basis of piecewise constants or continuous piecewise linears. The
/// coefficients do not depend on how the bubbles are realized; bubble `j`
/// is the one paired with trial dof `j`.
pub fn dual_basis_coefficients(comb: &MeshCombinatorics, layout: &DofLayout) -> Result<DualBasis> {
    match (layout.kind, layout.degree) {
        (SpaceKind::DiscPoly, 0) => Ok(disc0_coefficients(comb)),
        (SpaceKind::ContLinear, 1) => Ok(cont1_coefficients(comb)),
        _ => Err(Error::Unsupported(format!(
            "explicit dual basis for {:?} of degree {}",
            layout.kind, layout.degree
        ))),
    }
}

/// Piecewise constants: `p_{νT} = 1/d_ν` and
/// `q_{T'T} = δ − (1/(d+1)) Σ_{ν ∈ N⁰_T ∩ N⁰_T'} 1/d_ν`.
pub(crate) fn disc0_coefficients(comb: &MeshCombinatorics) -> DualBasis {
    let d = comb.dim as f64;
    let nf = comb.free_vertices.len();
    let mut p = Vec::new();
    let mut q = Vec::new();
    for t in 0..comb.n_cells {
        let mut own = 1.0;
        for v in comb.free_vertices_of(t) {
            let inv = 1.0 / comb.valence[v] as f64;
            p.push((comb.free_index[v].unwrap(), t, inv));
            own -= inv / (d + 1.0);
        }
        q.push((t, t, own));
        for t2 in comb.neighbors(t) {
            if t2 == t {
                continue;
            }
            let s: f64 = comb
                .free_vertices_of(t)
                .filter(|v| comb.cell(t2).contains(v))
                .map(|v| 1.0 / comb.valence[v] as f64)
                .sum();
            if s != 0.0 {
                q.push((t2, t, -s / (d + 1.0)));
            }
        }
    }
    DualBasis {
        phi: CsrMatrix::from_triplets(nf, comb.n_cells, &p),
        theta: CsrMatrix::from_triplets(comb.n_cells, comb.n_cells, &q),
    }
}

/// Continuous piecewise linears: free-row selection for `p`; `q` by the
/// three-case formula (γ vertex, free diagonal, free off-diagonal).
pub(crate) fn cont1_coefficients(comb: &MeshCombinatorics) -> DualBasis {
    let d = comb.dim as f64;
    let nf = comb.free_vertices.len();
    let nv = comb.n_vertices;
    let c = (d + 2.0) * (d + 1.0);
    let mut p = Vec::new();
    let mut q = Vec::new();
    for v in 0..nv {
        match comb.free_index[v] {
            None => q.push((v, v, 1.0 / (d + 1.0))),
            Some(r) => {
                p.push((r, v, 1.0));
                for w in comb.vertex_neighbors(v) {
                    let val = if w == v { d / c } else { -comb.patch_overlap(v, w) / (c * comb.patch_volume[w]) };
                    q.push((w, v, val));
                }
            }
        }
    }
    DualBasis { phi: CsrMatrix::from_triplets(nf, nv, &p), theta: CsrMatrix::from_triplets(nv, nv, &q) }
}

/// Quadrature-assembled `⟨ξ_i, ψ_j⟩` (trial dofs × dual functions).
pub fn dual_gram(
    mesh: &SimplicialMesh,
    comb: &MeshCombinatorics,
    layout: &DofLayout,
    bubbles: &BubbleSet,
    dual: &DualBasis,
) -> Result<CsrMatrix> {
    let mphi = assemble_mixed_mass(mesh, comb, layout)?;
    let mtheta = bubble_trial_mass(mesh, layout, bubbles);
    if dual.theta.nrows() != mtheta.nrows() || dual.phi.nrows() != mphi.nrows() {
        return Err(Error::DimensionMismatch { expected: mtheta.nrows(), got: dual.theta.nrows() });
    }
    Ok(mphi.transpose().mul(&dual.phi).add(&mtheta.transpose().mul(&dual.theta)))
}

/// `Σ_j ψ_j` at every quadrature point of the given cells.
pub fn dual_sum_at_nodes(
    mesh: &SimplicialMesh,
    comb: &MeshCombinatorics,
    layout: &DofLayout,
    bubbles: &BubbleSet,
    dual: &DualBasis,
    cells: &[usize],
) -> Vec<f64> {
    let d = mesh.dim();
    let phi_sum = dual.phi.row_sums();
    let theta_sum = dual.theta.row_sums();
    let rule = bubbles.rule(d, layout.degree);
    let mut v = vec![0.0; layout.n_local()];
    let mut out = Vec::new();
    for &c in cells {
        let verts = mesh.cell(c);
        for k in 0..rule.len() {
            let lam = rule.point(k);
            layout.eval_local(c, lam, &mut v);
            let mut s = 0.0;
            for a in 0..=d {
                if let Some(r) = comb.free_index[verts[a]] {
                    s += phi_sum[r] * lam[a];
                }
            }
            for &b in bubbles.in_cell(c) {
                s += theta_sum[b] * bubbles.eval(b, lam, &v);
            }
            out.push(s);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::bubbles::{realize_bubbles, BubbleKind};
    use crate::discretization::layout::dof_layout;
    use crate::mesh::{make_structured, DirichletSpec, Geometry, SimplicialMesh};

    #[test]
    fn square_polygon_coefficients() {
        let m = make_structured(Geometry::closed_polygon(4), 1, DirichletSpec::None).unwrap();
        let comb = MeshCombinatorics::new(&m);
        let l = dof_layout(&m, SpaceKind::DiscPoly, 0).unwrap();
        let dual = dual_basis_coefficients(&comb, &l).unwrap();
        for t in 0..4 {
            assert_eq!(dual.theta.get(t, t), 0.5);
            assert_eq!(dual.theta.get((t + 1) % 4, t), -0.25);
            assert_eq!(dual.theta.get((t + 3) % 4, t), -0.25);
            assert_eq!(dual.theta.get((t + 2) % 4, t), 0.0);
        }
    }

    #[test]
    fn cell_without_free_vertices() {
        let tri =
            SimplicialMesh::new(2, 2, vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0], vec![0, 1, 2], vec![vec![0, 1], vec![1, 2], vec![0, 2]])
                .unwrap();
        let comb = MeshCombinatorics::new(&tri);
        let l = dof_layout(&tri, SpaceKind::DiscPoly, 0).unwrap();
        let dual = dual_basis_coefficients(&comb, &l).unwrap();
        assert_eq!(dual.phi.nrows(), 0);
        assert_eq!(dual.theta.to_dense()[(0, 0)], 1.0);
    }

    #[test]
    fn continuous_boundary_vertex() {
        let m = make_structured(Geometry::interval(), 3, DirichletSpec::Boundary).unwrap();
        let comb = MeshCombinatorics::new(&m);
        let l = dof_layout(&m, SpaceKind::ContLinear, 1).unwrap();
        let dual = dual_basis_coefficients(&comb, &l).unwrap();
        assert_eq!(dual.theta.get(0, 0), 0.5);
        assert_eq!(dual.theta.col_sums()[0], 0.5);
        assert_eq!(dual.phi.col_sums()[0], 0.0);
        let b = realize_bubbles(&m, &comb, &l, BubbleKind::ElementPoly).unwrap();
        let g = dual_gram(&m, &comb, &l, &b, &dual).unwrap().to_dense();
        for i in 0..4 {
            for j in 0..4 {
                let e = if i == j { comb.patch_volume[i] / 2.0 } else { 0.0 };
                assert!((g[(i, j)] - e).abs() < 1e-14, "{i} {j} {}", g[(i, j)]);
            }
        }
    }
}
