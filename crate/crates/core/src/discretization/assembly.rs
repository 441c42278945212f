//! Mass-type matrices by exact quadrature.

use super::layout::{DofLayout, SpaceKind};
use super::quadrature::simplex_rule;
use crate::linalg::CsrMatrix;
use crate::mesh::{MeshCombinatorics, SimplicialMesh};
use crate::{Error, Result};

fn check(mesh: &SimplicialMesh, comb: &MeshCombinatorics, layout: &DofLayout) -> Result<()> {
    if comb.n_cells != mesh.n_cells() || comb.n_vertices != mesh.n_vertices() || layout.dim != mesh.dim() {
        return Err(Error::InvalidArgument("mesh, combinatorics and layout do not match".into()));
    }
    if layout.n_local() * mesh.n_cells() == 0 {
        return Err(Error::InvalidArgument("empty layout".into()));
    }
    Ok(())
}

/// `⟨φ_ν, ξ_j⟩` for free vertices `ν` (rows in `comb.free_vertices` order)
/// and trial dofs `j`.
pub fn assemble_mixed_mass(mesh: &SimplicialMesh, comb: &MeshCombinatorics, layout: &DofLayout) -> Result<CsrMatrix> {
    check(mesh, comb, layout)?;
    let d = mesh.dim();
    let rule = simplex_rule(d, layout.degree + 1);
    let nl = layout.n_local();
    let mut vals = vec![0.0; nl];
    let mut t = Vec::new();
    for c in 0..mesh.n_cells() {
        let verts = mesh.cell(c);
        let mut local = vec![0.0; (d + 1) * nl];
        for k in 0..rule.len() {
            let lam = rule.point(k);
            layout.eval_local(c, lam, &mut vals);
            for a in 0..=d {
                for i in 0..nl {
                    local[a * nl + i] += rule.weights[k] * lam[a] * vals[i];
                }
            }
        }
        let dofs = layout.cell_dofs(c);
        for a in 0..=d {
            if let Some(row) = comb.free_index[verts[a]] {
                for i in 0..nl {
                    t.push((row, dofs[i], comb.volume[c] * local[a * nl + i]));
                }
            }
        }
    }
    Ok(CsrMatrix::from_triplets(comb.free_vertices.len(), layout.n_dofs(), &t))
}

/// Trial mass matrix `⟨ξ_i, ξ_j⟩`.
pub fn assemble_mass(mesh: &SimplicialMesh, layout: &DofLayout) -> CsrMatrix {
    let rule = simplex_rule(mesh.dim(), 2 * layout.degree);
    let nl = layout.n_local();
    let mut vals = vec![0.0; nl];
    let mut t = Vec::new();
    for c in 0..mesh.n_cells() {
        let vol = mesh.volume(c);
        let mut local = vec![0.0; nl * nl];
        for k in 0..rule.len() {
            layout.eval_local(c, rule.point(k), &mut vals);
            for i in 0..nl {
                for j in 0..nl {
                    local[i * nl + j] += rule.weights[k] * vals[i] * vals[j];
                }
            }
        }
        let dofs = layout.cell_dofs(c);
        for i in 0..nl {
            for j in 0..nl {
                t.push((dofs[i], dofs[j], vol * local[i * nl + j]));
            }
        }
    }
    CsrMatrix::from_triplets(layout.n_dofs(), layout.n_dofs(), &t)
}

/// Mass matrix of S^{0,1}_{T,0} (free vertex hats), closed form.
pub fn assemble_p1_mass(mesh: &SimplicialMesh, comb: &MeshCombinatorics) -> CsrMatrix {
    let d = mesh.dim();
    let mut t = Vec::new();
    let denom = ((d + 1) * (d + 2)) as f64;
    for c in 0..mesh.n_cells() {
        let v = mesh.cell(c);
        for a in 0..=d {
            for b in 0..=d {
                if let (Some(i), Some(j)) = (comb.free_index[v[a]], comb.free_index[v[b]]) {
                    let f = if a == b { 2.0 } else { 1.0 };
                    t.push((i, j, comb.volume[c] * f / denom));
                }
            }
        }
    }
    let n = comb.free_vertices.len();
    CsrMatrix::from_triplets(n, n, &t)
}

/// Stiffness matrix `∫ ∇φ_ν·∇φ_ν'` of S^{0,1}_{T,0}, closed form.
pub fn assemble_p1_stiffness(mesh: &SimplicialMesh, comb: &MeshCombinatorics) -> CsrMatrix {
    let d = mesh.dim();
    let mut t = Vec::new();
    for c in 0..mesh.n_cells() {
        let v = mesh.cell(c);
        let vol = comb.volume[c];
        let local: Vec<f64> = if d == 1 {
            let k = 1.0 / vol;
            vec![k, -k, -k, k]
        } else {
            // edge opposite vertex a, cyclically oriented
            let p: Vec<[f64; 3]> = v.iter().map(|&i| mesh.point(i)).collect();
            let e: Vec<[f64; 3]> = (0..3)
                .map(|a| {
                    let (x, y) = (p[(a + 1) % 3], p[(a + 2) % 3]);
                    [y[0] - x[0], y[1] - x[1], y[2] - x[2]]
                })
                .collect();
            let mut l = vec![0.0; 9];
            for a in 0..3 {
                for b in 0..3 {
                    l[a * 3 + b] = (e[a][0] * e[b][0] + e[a][1] * e[b][1] + e[a][2] * e[b][2]) / (4.0 * vol);
                }
            }
            l
        };
        for a in 0..=d {
            for b in 0..=d {
                if let (Some(i), Some(j)) = (comb.free_index[v[a]], comb.free_index[v[b]]) {
                    t.push((i, j, local[a * (d + 1) + b]));
                }
            }
        }
    }
    let n = comb.free_vertices.len();
    CsrMatrix::from_triplets(n, n, &t)
}

/// `⟨φ_ν, 1⟩ = |ω(ν)|/(d+1)` for free vertices.
pub fn mass_with_one(comb: &MeshCombinatorics) -> Vec<f64> {
    let d = comb.dim as f64;
    comb.free_vertices.iter().map(|&v| comb.patch_volume[v] / (d + 1.0)).collect()
}

/// `|supp ξ|` per dof.
pub fn support_measure(comb: &MeshCombinatorics, layout: &DofLayout) -> Vec<f64> {
    (0..layout.n_dofs()).map(|j| layout.support(j).iter().map(|&c| comb.volume[c]).sum()).collect()
}

/// `∥h^s ξ∥²` per dof, with `h = |T|^{1/d}` elementwise.
pub fn weighted_norms_sq(mesh: &SimplicialMesh, comb: &MeshCombinatorics, layout: &DofLayout, s: f64) -> Vec<f64> {
    let rule = simplex_rule(mesh.dim(), 2 * layout.degree);
    let nl = layout.n_local();
    let mut vals = vec![0.0; nl];
    let mut out = vec![0.0; layout.n_dofs()];
    for c in 0..mesh.n_cells() {
        let w = comb.volume[c] * comb.h[c].powf(2.0 * s);
        let dofs = layout.cell_dofs(c);
        for k in 0..rule.len() {
            layout.eval_local(c, rule.point(k), &mut vals);
            for i in 0..nl {
                out[dofs[i]] += w * rule.weights[k] * vals[i] * vals[i];
            }
        }
    }
    out
}

/// Largest off-diagonal entry of the reference Gram matrix of a
/// discontinuous layout, relative to its diagonal.
pub fn local_orthogonality_defect(layout: &DofLayout) -> f64 {
    if layout.kind != SpaceKind::DiscPoly {
        return f64::INFINITY;
    }
    let g = layout.local_basis().unwrap().reference_gram();
    let mut m = 0.0f64;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            if i != j {
                m = m.max(g[(i, j)].abs() / (g[(i, i)] * g[(j, j)]).sqrt());
            }
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::layout::dof_layout;
    use crate::linalg::gauss::gauss_legendre;
    use crate::mesh::{make_structured, uniform_refine, DirichletSpec, Geometry};

    #[test]
    fn mixed_mass_constants() {
        let m = uniform_refine(&make_structured(Geometry::UnitSquare, 1, DirichletSpec::Boundary).unwrap());
        let comb = MeshCombinatorics::new(&m);
        let l = dof_layout(&m, SpaceKind::DiscPoly, 0).unwrap();
        let mm = assemble_mixed_mass(&m, &comb, &l).unwrap();
        for c in 0..m.n_cells() {
            for v in comb.free_vertices_of(c) {
                let r = comb.free_index[v].unwrap();
                assert!((mm.get(r, c) - comb.volume[c] / 3.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn mixed_mass_linear_legendre_vs_gauss() {
        // interval [0, h] with both endpoints free; left hat against √3(2x/h − 1)
        let h = 0.37;
        let m = make_structured(Geometry::Interval { length: h }, 1, DirichletSpec::None).unwrap();
        let comb = MeshCombinatorics::new(&m);
        let l = dof_layout(&m, SpaceKind::DiscPoly, 1).unwrap();
        let mm = assemble_mixed_mass(&m, &comb, &l).unwrap();
        let (x, w) = gauss_legendre(10);
        let brute: f64 = x.iter().zip(&w).map(|(t, wt)| wt * h * (1.0 - t) * 3f64.sqrt() * (2.0 * t - 1.0)).sum();
        assert!((mm.get(0, 1) - brute).abs() < 1e-15);
        assert!((brute + h * 3f64.sqrt() / 6.0).abs() < 1e-15);
    }

    #[test]
    fn p1_matrices_annihilate_constants() {
        let m = make_structured(Geometry::CubeSurface, 1, DirichletSpec::None).unwrap();
        let comb = MeshCombinatorics::new(&m);
        let k = assemble_p1_stiffness(&m, &comb);
        let mut y = vec![0.0; 8];
        k.matvec(&[1.0; 8], &mut y);
        assert!(y.iter().all(|v| v.abs() < 1e-14));
        let ms = assemble_p1_mass(&m, &comb);
        assert!((ms.values().iter().sum::<f64>() - 6.0).abs() < 1e-13);
        let w = mass_with_one(&comb);
        assert!((w.iter().sum::<f64>() - 6.0).abs() < 1e-13);
    }

    #[test]
    fn orthonormal_layout_mass_is_volume() {
        let m = make_structured(Geometry::CubeSurface, 1, DirichletSpec::None).unwrap();
        let l = dof_layout(&m, SpaceKind::DiscPoly, 2).unwrap();
        let mass = assemble_mass(&m, &l).to_dense();
        for i in 0..l.n_dofs() {
            for j in 0..l.n_dofs() {
                let c = if i < 12 { i } else { (i - 12) / 5 };
                let e = if i == j { m.volume(c) } else { 0.0 };
                assert!((mass[(i, j)] - e).abs() < 1e-13);
            }
        }
        assert!(local_orthogonality_defect(&l) < 1e-12);
    }
}
