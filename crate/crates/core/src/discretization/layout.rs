//! Enumeration of trial basis functions.
//!
//! Dof ordering:
//! * discontinuous: dof `c` is `ξ_{c,0} = 1` on cell `c`; higher-order
//!   function `i ≥ 1` of cell `c` is dof `n_cells + c·m + (i − 1)`;
//! * continuous: dof `v` is the hat of vertex `v`; then `ℓ − 1` functions per
//!   edge (per cell for d = 1) in edge order, then interior cell functions.

use super::basis::{local_orthonormal_basis, poly_dim, LocalPolyBasis};
use crate::mesh::SimplicialMesh;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    /// Discontinuous piecewise polynomials S^{-1,ℓ}.
    DiscPoly,
    /// Continuous piecewise linears S^{0,1}.
    ContLinear,
    /// Continuous piecewise polynomials S^{0,ℓ}, ℓ ≥ 2.
    ContPoly,
}

#[derive(Debug, Clone)]
pub struct DofLayout {
    pub kind: SpaceKind,
    pub degree: usize,
    pub dim: usize,
    n_dofs: usize,
    n_lowest: usize,
    n_local: usize,
    cell_dofs: Vec<usize>,
    /// Per cell and local edge: whether the global orientation runs from the
    /// second to the first local vertex.
    edge_flip: Vec<[bool; 3]>,
    poly: Option<LocalPolyBasis>,
    support: Vec<Vec<usize>>,
}

impl DofLayout {
    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    /// Size of the lowest-order block.
    pub fn n_lowest(&self) -> usize {
        self.n_lowest
    }

    pub fn n_higher(&self) -> usize {
        self.n_dofs - self.n_lowest
    }

    /// Number of local functions per cell.
    pub fn n_local(&self) -> usize {
        self.n_local
    }

    pub fn n_cells(&self) -> usize {
        self.cell_dofs.len() / self.n_local
    }

    /// Global dofs of the local functions of cell `c`.
    pub fn cell_dofs(&self, c: usize) -> &[usize] {
        &self.cell_dofs[c * self.n_local..(c + 1) * self.n_local]
    }

    /// Cells in the support of a dof, ascending.
    pub fn support(&self, dof: usize) -> &[usize] {
        &self.support[dof]
    }

    pub fn local_basis(&self) -> Option<&LocalPolyBasis> {
        self.poly.as_ref()
    }

    /// Values of the local functions of cell `c` at barycentric point `lambda`.
    pub fn eval_local(&self, c: usize, lambda: &[f64], out: &mut [f64]) {
        match self.kind {
            SpaceKind::DiscPoly => self.poly.as_ref().unwrap().eval(lambda, out),
            SpaceKind::ContLinear => out[..=self.dim].copy_from_slice(&lambda[..=self.dim]),
            SpaceKind::ContPoly => {
                let d = self.dim;
                out[..=d].copy_from_slice(&lambda[..=d]);
                let mut k = d + 1;
                let nb = self.degree - 1;
                if d == 1 {
                    let b = 4.0 * lambda[0] * lambda[1];
                    let s = lambda[1] - lambda[0];
                    for p in 0..nb {
                        out[k] = b * s.powi(p as i32);
                        k += 1;
                    }
                    return;
                }
                for e in 0..3 {
                    let (i, j) = (e, (e + 1) % 3);
                    let b = 4.0 * lambda[i] * lambda[j];
                    let s = if self.edge_flip[c][e] { lambda[j] - lambda[i] } else { lambda[i] - lambda[j] };
                    for p in 0..nb {
                        out[k] = b * s.powi(p as i32);
                        k += 1;
                    }
                }
                if self.degree >= 3 {
                    let b = 27.0 * lambda[0] * lambda[1] * lambda[2];
                    for total in 0..=(self.degree - 3) {
                        for y in 0..=total {
                            out[k] = b * lambda[1].powi((total - y) as i32) * lambda[2].powi(y as i32);
                            k += 1;
                        }
                    }
                }
            }
        }
    }
}

/// Builds the dof layout of a trial space on `mesh`.
pub fn dof_layout(mesh: &SimplicialMesh, kind: SpaceKind, degree: usize) -> Result<DofLayout> {
    match kind {
        SpaceKind::DiscPoly => {
            let basis = local_orthonormal_basis(mesh.dim(), degree)?;
            disc_layout_with_basis(mesh, basis)
        }
        SpaceKind::ContLinear if degree == 1 => cont_layout(mesh, 1),
        SpaceKind::ContPoly if degree >= 2 => cont_layout(mesh, degree),
        _ => Err(Error::Unsupported(format!("space {kind:?} with degree {degree}"))),
    }
}

/// Discontinuous layout with a caller-supplied local basis whose first
/// function must be the constant 1.
pub fn disc_layout_with_basis(mesh: &SimplicialMesh, basis: LocalPolyBasis) -> Result<DofLayout> {
    let d = mesh.dim();
    if basis.dim != d {
        return Err(Error::DimensionMismatch { expected: d, got: basis.dim });
    }
    let c0 = basis.coeffs.row(0);
    if (c0[0] - 1.0).abs() > 1e-14 || c0.iter().skip(1).any(|v| v.abs() > 1e-14) {
        return Err(Error::InvalidArgument("first local function must be the constant 1".into()));
    }
    let nc = mesh.n_cells();
    let n_local = poly_dim(d, basis.degree);
    let m = n_local - 1;
    let mut cell_dofs = Vec::with_capacity(nc * n_local);
    for c in 0..nc {
        cell_dofs.push(c);
        for i in 1..n_local {
            cell_dofs.push(nc + c * m + (i - 1));
        }
    }
    let n_dofs = nc * n_local;
    Ok(finish(DofLayout {
        kind: SpaceKind::DiscPoly,
        degree: basis.degree,
        dim: d,
        n_dofs,
        n_lowest: nc,
        n_local,
        cell_dofs,
        edge_flip: vec![],
        poly: Some(basis),
        support: vec![],
    }))
}

fn cont_layout(mesh: &SimplicialMesh, degree: usize) -> Result<DofLayout> {
    let d = mesh.dim();
    let nv = mesh.n_vertices();
    let nc = mesh.n_cells();
    let nb = degree - 1;
    let mut cell_dofs = Vec::new();
    let mut edge_flip = Vec::new();
    let n_local;
    let n_dofs;
    if d == 1 {
        n_local = 2 + nb;
        for c in 0..nc {
            cell_dofs.extend_from_slice(mesh.cell(c));
            for p in 0..nb {
                cell_dofs.push(nv + c * nb + p);
            }
        }
        n_dofs = nv + nc * nb;
    } else {
        let n_cell_fn = if degree >= 3 { poly_dim(2, degree - 3) } else { 0 };
        n_local = 3 + 3 * nb + n_cell_fn;
        let (edges, cell_edges) = mesh.edges();
        let ne = edges.len();
        for c in 0..nc {
            let v = mesh.cell(c);
            cell_dofs.extend_from_slice(v);
            let mut flips = [false; 3];
            for e in 0..3 {
                flips[e] = v[e] > v[(e + 1) % 3];
                for p in 0..nb {
                    cell_dofs.push(nv + cell_edges[c][e] * nb + p);
                }
            }
            edge_flip.push(flips);
            for p in 0..n_cell_fn {
                cell_dofs.push(nv + ne * nb + c * n_cell_fn + p);
            }
        }
        n_dofs = nv + ne * nb + nc * n_cell_fn;
    }
    let kind = if degree == 1 { SpaceKind::ContLinear } else { SpaceKind::ContPoly };
    Ok(finish(DofLayout {
        kind,
        degree,
        dim: d,
        n_dofs,
        n_lowest: nv,
        n_local,
        cell_dofs,
        edge_flip,
        poly: None,
        support: vec![],
    }))
}

fn finish(mut l: DofLayout) -> DofLayout {
    let mut support = vec![Vec::new(); l.n_dofs];
    for c in 0..l.cell_dofs.len() / l.n_local {
        for &dof in l.cell_dofs(c) {
            support[dof].push(c);
        }
    }
    l.support = support;
    l
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{make_structured, DirichletSpec, Geometry};

    #[test]
    fn dof_counts() {
        let cube = make_structured(Geometry::CubeSurface, 1, DirichletSpec::None).unwrap();
        let l = dof_layout(&cube, SpaceKind::DiscPoly, 2).unwrap();
        assert_eq!((l.n_dofs(), l.n_lowest(), l.n_local()), (72, 12, 6));
        let iv = make_structured(Geometry::interval(), 1, DirichletSpec::None).unwrap();
        assert_eq!(dof_layout(&iv, SpaceKind::DiscPoly, 0).unwrap().n_dofs(), 1);
        let sq = make_structured(Geometry::closed_polygon(4), 1, DirichletSpec::None).unwrap();
        assert_eq!(dof_layout(&sq, SpaceKind::ContLinear, 1).unwrap().n_dofs(), 4);
        // P3 on the cube: 8 vertices + 18 edges * 2 + 12 cells
        assert_eq!(dof_layout(&cube, SpaceKind::ContPoly, 3).unwrap().n_dofs(), 8 + 36 + 12);
        assert!(dof_layout(&cube, SpaceKind::ContPoly, 1).is_err());
        assert!(dof_layout(&cube, SpaceKind::ContLinear, 2).is_err());
    }

    #[test]
    fn supports_are_bounded() {
        let cube = make_structured(Geometry::CubeSurface, 2, DirichletSpec::None).unwrap();
        let l = dof_layout(&cube, SpaceKind::ContPoly, 3).unwrap();
        for dof in 0..l.n_dofs() {
            assert!(!l.support(dof).is_empty() && l.support(dof).len() <= 8);
        }
    }
}
