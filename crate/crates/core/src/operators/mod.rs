//! Galerkin operator backends: the negative-order matrix `A` on the trial
//! space and the opposite-order matrix `B^S` on the free vertex hats.

mod inner_product;
mod order2;
mod single_layer;

use nalgebra::DMatrix;

pub use inner_product::MeshInnerProduct;
pub use order2::{
    assemble_order2_matrix, assemble_order2_pair, assemble_order2_pairs, order2_oracle_change, Order2Oracle, Order2Pair,
};
pub use single_layer::{
    adapt_hypersingular, assemble_hypersingular_curve, assemble_single_layer_curve, hat_derivatives,
};

use crate::discretization::{assemble_mass, assemble_p1_mass, mass_with_one, DofLayout};
use crate::linalg::{CsrMatrix, LinearOperator};
use crate::mesh::{MeshCombinatorics, SimplicialMesh};
use crate::Result;

/// Default rank-one weight of the adapted hypersingular operator.
pub const DEFAULT_ALPHA: f64 = 0.05;
/// Default number of uniform refinements of the order −2 oracle.
pub const DEFAULT_ORACLE_DEPTH: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BackendKind {
    /// Single layer on a closed curve, order −1.
    SingleLayerCurve,
    /// `(−Δ + I)^{-1}` by a fine-grid Galerkin oracle, order −2.
    Order2,
    /// L2 mass matrices, order 0.
    Identity,
}

impl BackendKind {
    /// Sobolev index `s`, half the operator order.
    pub fn sobolev_index(self) -> f64 {
        match self {
            BackendKind::SingleLayerCurve => 0.5,
            BackendKind::Order2 => 1.0,
            BackendKind::Identity => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BackendOptions {
    pub alpha: f64,
    pub oracle_depth: usize,
    /// Run the oracle self-convergence check (order −2 only).
    pub guard: bool,
}

impl Default for BackendOptions {
    fn default() -> Self {
        BackendOptions { alpha: DEFAULT_ALPHA, oracle_depth: DEFAULT_ORACLE_DEPTH, guard: true }
    }
}

/// Opposite-order matrix, dense for integral operators and sparse for
/// differential ones.
#[derive(Debug, Clone)]
pub enum OppositeMatrix {
    Dense(DMatrix<f64>),
    Sparse(CsrMatrix),
}

impl LinearOperator for OppositeMatrix {
    fn nrows(&self) -> usize {
        match self {
            OppositeMatrix::Dense(m) => m.nrows(),
            OppositeMatrix::Sparse(m) => m.nrows(),
        }
    }
    fn ncols(&self) -> usize {
        match self {
            OppositeMatrix::Dense(m) => m.ncols(),
            OppositeMatrix::Sparse(m) => m.ncols(),
        }
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        match self {
            OppositeMatrix::Dense(m) => LinearOperator::apply(m, x, y),
            OppositeMatrix::Sparse(m) => m.matvec(x, y),
        }
    }
    fn to_dense(&self) -> DMatrix<f64> {
        match self {
            OppositeMatrix::Dense(m) => m.clone(),
            OppositeMatrix::Sparse(m) => m.to_dense(),
        }
    }
    fn nnz(&self) -> usize {
        match self {
            OppositeMatrix::Dense(m) => m.nrows() * m.ncols(),
            OppositeMatrix::Sparse(m) => m.nnz(),
        }
    }
}

/// Output of a backend on one mesh.
#[derive(Debug, Clone)]
pub struct OperatorPair {
    pub kind: BackendKind,
    pub s: f64,
    pub a: DMatrix<f64>,
    pub bs: OppositeMatrix,
    /// Oracle self-convergence measure, order −2 only.
    pub oracle_change: Option<f64>,
}

/// Trial mass matrix and P1 mass matrix on the free vertices.
pub fn assemble_identity_pair(
    mesh: &SimplicialMesh,
    comb: &MeshCombinatorics,
    layout: &DofLayout,
) -> (DMatrix<f64>, CsrMatrix) {
    let a = assemble_mass(mesh, layout).to_dense();
    ((&a + a.transpose()) * 0.5, assemble_p1_mass(mesh, comb))
}

/// Assembles `A` and `B^S` for the chosen backend.
pub fn assemble_pair(
    kind: BackendKind,
    mesh: &SimplicialMesh,
    comb: &MeshCombinatorics,
    layout: &DofLayout,
    opts: &BackendOptions,
) -> Result<OperatorPair> {
    Ok(assemble_pairs(kind, mesh, comb, &[layout], opts)?.remove(0))
}

/// [`assemble_pair`] for several trial layouts on one mesh; the order −2
/// backend factors its fine grids once for all of them.
pub fn assemble_pairs(
    kind: BackendKind,
    mesh: &SimplicialMesh,
    comb: &MeshCombinatorics,
    layouts: &[&DofLayout],
    opts: &BackendOptions,
) -> Result<Vec<OperatorPair>> {
    let s = kind.sobolev_index();
    match kind {
        BackendKind::SingleLayerCurve => {
            let b = assemble_hypersingular_curve(mesh, comb)?;
            let bs = adapt_hypersingular(&b, opts.alpha, &mass_with_one(comb))?;
            layouts
                .iter()
                .map(|l| {
                    let a = assemble_single_layer_curve(mesh, l)?;
                    Ok(OperatorPair { kind, s, a, bs: OppositeMatrix::Dense(bs.clone()), oracle_change: None })
                })
                .collect()
        }
        BackendKind::Order2 => Ok(assemble_order2_pairs(mesh, comb, layouts, opts.oracle_depth, opts.guard)?
            .into_iter()
            .map(|p| OperatorPair { kind, s, a: p.a, bs: OppositeMatrix::Sparse(p.bs), oracle_change: p.oracle_change })
            .collect()),
        BackendKind::Identity => Ok(layouts
            .iter()
            .map(|l| {
                let (a, bs) = assemble_identity_pair(mesh, comb, l);
                OperatorPair { kind, s, a, bs: OppositeMatrix::Sparse(bs), oracle_change: None }
            })
            .collect()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{dof_layout, SpaceKind};
    use crate::mesh::{make_structured, DirichletSpec, Geometry};

    #[test]
    fn identity_pair_is_diagonal_for_orthogonal_bases() {
        let m = make_structured(Geometry::CubeSurface, 1, DirichletSpec::None).unwrap();
        let comb = MeshCombinatorics::new(&m);
        for deg in [0, 2] {
            let l = dof_layout(&m, SpaceKind::DiscPoly, deg).unwrap();
            let (a, _) = assemble_identity_pair(&m, &comb, &l);
            for i in 0..l.n_dofs() {
                let c = l.support(i)[0];
                for j in 0..l.n_dofs() {
                    let want = if i == j { comb.volume[c] } else { 0.0 };
                    assert!((a[(i, j)] - want).abs() < 1e-13, "{i},{j}");
                }
            }
        }
    }
}
