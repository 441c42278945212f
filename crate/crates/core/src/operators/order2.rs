//! Order −2 backend: `A = ⟨ξ_j, L^{-1} ξ_i⟩` with `L = −Δ + I` under the
//! Dirichlet condition on γ, realized as `M_cᵀ K_f^{-1} M_c` with continuous
//! quadratic elements on a uniformly refined copy of the mesh.

use nalgebra::DMatrix;

use crate::discretization::quadrature::simplex_rule;
use crate::discretization::{assemble_p1_mass, assemble_p1_stiffness, DofLayout};
use crate::linalg::{CsrMatrix, SparseCholesky};
use crate::mesh::{uniform_refine_traced, MeshCombinatorics, RefinementTrace, SimplicialMesh};
use crate::{Error, Result};

/// Largest tolerated oracle change between consecutive depths.
pub const ORACLE_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone)]
pub struct Order2Pair {
    pub a: DMatrix<f64>,
    /// Stiffness plus mass on the free vertices of the coarse mesh.
    pub bs: CsrMatrix,
    pub oracle_change: Option<f64>,
}

/// Continuous quadratic elements on the fine mesh with the γ dofs removed.
struct FineSpace {
    n_local: usize,
    /// Free index per cell and local function, `None` on γ.
    cell_dofs: Vec<Option<usize>>,
    n_free: usize,
}

fn fine_space(fine: &SimplicialMesh) -> FineSpace {
    let d = fine.dim();
    let nv = fine.n_vertices();
    let on_gamma = fine.dirichlet_vertices();
    let mut global = Vec::new();
    let mut fixed = on_gamma.clone();
    let n_local;
    if d == 1 {
        n_local = 3;
        for c in 0..fine.n_cells() {
            global.extend_from_slice(fine.cell(c));
            global.push(nv + c);
        }
        fixed.extend(std::iter::repeat_n(false, fine.n_cells()));
    } else {
        n_local = 6;
        let (edges, cell_edges) = fine.edges();
        for c in 0..fine.n_cells() {
            global.extend_from_slice(fine.cell(c));
            global.extend(cell_edges[c].iter().map(|e| nv + e));
        }
        let faces = fine.dirichlet_faces();
        fixed.extend(edges.iter().map(|e| faces.contains(&e.to_vec())));
    }
    let mut index = vec![None; fixed.len()];
    let mut n_free = 0;
    for (k, f) in fixed.iter().enumerate() {
        if !f {
            index[k] = Some(n_free);
            n_free += 1;
        }
    }
    FineSpace { n_local, cell_dofs: global.iter().map(|&g| index[g]).collect(), n_free }
}

/// Quadratic local functions `λ_a` and `4 λ_a λ_b` (edges (0,1), (1,2),
/// (2,0); the single edge for d = 1) and their gradients.
fn quadratic_shapes(lam: &[f64], grad_lam: &[[f64; 2]], vals: &mut [f64], grads: &mut [[f64; 2]]) {
    let n = lam.len();
    for a in 0..n {
        vals[a] = lam[a];
        grads[a] = grad_lam[a];
    }
    let pairs: &[(usize, usize)] = if n == 2 { &[(0, 1)] } else { &[(0, 1), (1, 2), (2, 0)] };
    for (k, &(a, b)) in pairs.iter().enumerate() {
        vals[n + k] = 4.0 * lam[a] * lam[b];
        for x in 0..2 {
            grads[n + k][x] = 4.0 * (lam[a] * grad_lam[b][x] + lam[b] * grad_lam[a][x]);
        }
    }
}

fn barycentric_gradients(mesh: &SimplicialMesh, c: usize) -> Vec<[f64; 2]> {
    let v = mesh.cell(c);
    if mesh.dim() == 1 {
        let g = 1.0 / (mesh.vertex(v[1])[0] - mesh.vertex(v[0])[0]);
        return vec![[-g, 0.0], [g, 0.0]];
    }
    let (p0, p1, p2) = (mesh.vertex(v[0]), mesh.vertex(v[1]), mesh.vertex(v[2]));
    let (a, b, cc, dd) = (p1[0] - p0[0], p2[0] - p0[0], p1[1] - p0[1], p2[1] - p0[1]);
    let det = a * dd - b * cc;
    // rows of the inverse of [[a, b], [cc, dd]]
    let g1 = [dd / det, -b / det];
    let g2 = [-cc / det, a / det];
    vec![[-g1[0] - g2[0], -g1[1] - g2[1]], g1, g2]
}

/// Fine stiffness plus mass matrix and the fine × coarse-trial mass matrix.
/// Stiffness plus mass of the fine quadratic space.
fn fine_stiffness(fine: &SimplicialMesh, space: &FineSpace) -> CsrMatrix {
    let d = fine.dim();
    let nl = space.n_local;
    let rule = simplex_rule(d, 4);
    let mut vals = vec![0.0; nl];
    let mut grads = vec![[0.0; 2]; nl];
    let mut tk = Vec::new();
    for f in 0..fine.n_cells() {
        let vol = fine.volume(f);
        let gl = barycentric_gradients(fine, f);
        let mut kloc = vec![0.0; nl * nl];
        for q in 0..rule.len() {
            let w = rule.weights[q] * vol;
            quadratic_shapes(rule.point(q), &gl, &mut vals, &mut grads);
            for i in 0..nl {
                for j in 0..nl {
                    let g = grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1];
                    kloc[i * nl + j] += w * (g + vals[i] * vals[j]);
                }
            }
        }
        let dofs = &space.cell_dofs[f * nl..(f + 1) * nl];
        for i in 0..nl {
            let Some(gi) = dofs[i] else { continue };
            for j in 0..nl {
                if let Some(gj) = dofs[j] {
                    tk.push((gi, gj, kloc[i * nl + j]));
                }
            }
        }
    }
    CsrMatrix::from_triplets(space.n_free, space.n_free, &tk)
}

/// Fine quadratic functions against coarse trial functions.
fn fine_trial_mass(fine: &SimplicialMesh, space: &FineSpace, trace: &RefinementTrace, layout: &DofLayout) -> CsrMatrix {
    let d = fine.dim();
    let n = d + 1;
    let nl = space.n_local;
    let rule = simplex_rule(d, 4.max(layout.degree + 2));
    let ntr = layout.n_local();
    let mut vals = vec![0.0; nl];
    let mut grads = vec![[0.0; 2]; nl];
    let mut tvals = vec![0.0; ntr];
    let mut lam = vec![0.0; n];
    let mut tm = Vec::new();
    for f in 0..fine.n_cells() {
        let vol = fine.volume(f);
        let gl = barycentric_gradients(fine, f);
        let c = trace.ancestor[f];
        let lf = trace.lambda(f, d);
        let mut mloc = vec![0.0; nl * ntr];
        for q in 0..rule.len() {
            let mu = rule.point(q);
            let w = rule.weights[q] * vol;
            quadratic_shapes(mu, &gl, &mut vals, &mut grads);
            for j in 0..n {
                lam[j] = (0..n).map(|a| mu[a] * lf[a * n + j]).sum();
            }
            layout.eval_local(c, &lam, &mut tvals);
            for i in 0..nl {
                for j in 0..ntr {
                    mloc[i * ntr + j] += w * vals[i] * tvals[j];
                }
            }
        }
        let dofs = &space.cell_dofs[f * nl..(f + 1) * nl];
        let tdofs = layout.cell_dofs(c);
        for i in 0..nl {
            let Some(gi) = dofs[i] else { continue };
            for j in 0..ntr {
                tm.push((gi, tdofs[j], mloc[i * ntr + j]));
            }
        }
    }
    CsrMatrix::from_triplets(space.n_free, layout.n_dofs(), &tm)
}

/// Right-hand sides per fine-grid solve.
const SOLVE_BLOCK: usize = 128;

/// The factored fine-grid problem for one mesh and depth, reusable across
/// trial layouts on that mesh.
pub struct Order2Oracle {
    coarse_cells: usize,
    dim: usize,
    depth: usize,
    fine: SimplicialMesh,
    trace: RefinementTrace,
    space: FineSpace,
    chol: SparseCholesky,
}

impl Order2Oracle {
    pub fn new(mesh: &SimplicialMesh, depth: usize) -> Result<Self> {
        if mesh.dim() != mesh.embed_dim() {
            return Err(Error::Unsupported("order −2 backend needs a flat domain".into()));
        }
        let mut fine = mesh.clone();
        let mut trace = RefinementTrace::identity(mesh);
        for _ in 0..depth {
            let (m, t) = uniform_refine_traced(&fine, &trace);
            fine = m;
            trace = t;
        }
        let space = fine_space(&fine);
        if space.n_free == 0 {
            return Err(Error::InvalidArgument("fine mesh has no free dofs".into()));
        }
        let chol = SparseCholesky::factor(&fine_stiffness(&fine, &space))?;
        Ok(Order2Oracle { coarse_cells: mesh.n_cells(), dim: mesh.dim(), depth, fine, trace, space, chol })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// `M_cᵀ K_f⁻¹ M_c` for a trial layout on the coarse mesh.
    pub fn matrix(&self, layout: &DofLayout) -> Result<DMatrix<f64>> {
        if layout.dim != self.dim || layout.n_cells() != self.coarse_cells || layout.cell_dofs(0).is_empty() {
            return Err(Error::InvalidArgument("layout does not match mesh".into()));
        }
        let mt = fine_trial_mass(&self.fine, &self.space, &self.trace, layout).transpose();
        let n = layout.n_dofs();
        let nf = self.space.n_free;
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut rhs = vec![0.0; nf * SOLVE_BLOCK.min(n)];
        for block in (0..n).collect::<Vec<_>>().chunks(SOLVE_BLOCK) {
            let x = &mut rhs[..nf * block.len()];
            x.iter_mut().for_each(|v| *v = 0.0);
            for (c, &j) in block.iter().enumerate() {
                for (i, v) in mt.row(j) {
                    x[c * nf + i] = v;
                }
            }
            self.chol.solve_block(x, block.len());
            for c in 0..block.len() {
                let mut col = vec![0.0; n];
                mt.matvec(&x[c * nf..(c + 1) * nf], &mut col);
                cols.push(col);
            }
        }
        let a = DMatrix::from_fn(n, n, |i, j| cols[j][i]);
        Ok((&a + a.transpose()) * 0.5)
    }
}

/// The oracle matrix at a fixed refinement depth.
pub fn assemble_order2_matrix(mesh: &SimplicialMesh, layout: &DofLayout, depth: usize) -> Result<DMatrix<f64>> {
    if layout.dim != mesh.dim() || layout.n_cells() != mesh.n_cells() {
        return Err(Error::InvalidArgument("layout does not match mesh".into()));
    }
    Order2Oracle::new(mesh, depth)?.matrix(layout)
}

/// Largest entry change between two oracle matrices, each entry measured
/// relative to `sqrt(A_ii A_jj)` of the finer one.
pub fn order2_oracle_change(coarse: &DMatrix<f64>, fine: &DMatrix<f64>) -> f64 {
    let n = fine.nrows();
    let mut m = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let scale = (fine[(i, i)] * fine[(j, j)]).sqrt();
            m = m.max((fine[(i, j)] - coarse[(i, j)]).abs() / scale);
        }
    }
    m
}

/// `A` at depth `depth` together with `B^S`; with `guard` set the oracle is
/// also built at `depth − 1` and rejected when entries moved by more than
/// [`ORACLE_TOLERANCE`].
pub fn assemble_order2_pair(
    mesh: &SimplicialMesh,
    comb: &MeshCombinatorics,
    layout: &DofLayout,
    depth: usize,
    guard: bool,
) -> Result<Order2Pair> {
    Ok(assemble_order2_pairs(mesh, comb, &[layout], depth, guard)?.remove(0))
}

/// [`assemble_order2_pair`] for several layouts on one mesh, sharing the
/// fine-grid factorizations.
pub fn assemble_order2_pairs(
    mesh: &SimplicialMesh,
    comb: &MeshCombinatorics,
    layouts: &[&DofLayout],
    depth: usize,
    guard: bool,
) -> Result<Vec<Order2Pair>> {
    if depth < 2 {
        return Err(Error::InvalidArgument(format!("oracle depth must be at least 2, got {depth}")));
    }
    for l in layouts {
        if l.dim != mesh.dim() || l.n_cells() != mesh.n_cells() {
            return Err(Error::InvalidArgument("layout does not match mesh".into()));
        }
    }
    let oracle = Order2Oracle::new(mesh, depth)?;
    let mut a: Vec<DMatrix<f64>> = layouts.iter().map(|l| oracle.matrix(l)).collect::<Result<_>>()?;
    drop(oracle);
    let mut changes = vec![None; layouts.len()];
    if guard {
        let prev = Order2Oracle::new(mesh, depth - 1)?;
        for (k, l) in layouts.iter().enumerate() {
            let change = order2_oracle_change(&prev.matrix(l)?, &a[k]);
            if change > ORACLE_TOLERANCE {
                return Err(Error::OracleNotConverged { depth, change });
            }
            changes[k] = Some(change);
        }
    }
    let bs = assemble_p1_stiffness(mesh, comb).add(&assemble_p1_mass(mesh, comb));
    Ok(a.drain(..).zip(changes).map(|(a, oracle_change)| Order2Pair { a, bs: bs.clone(), oracle_change }).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{dof_layout, SpaceKind};
    use crate::mesh::{make_structured, DirichletSpec, Geometry};

    #[test]
    fn interval_oracle_self_converges() {
        let m = make_structured(Geometry::interval(), 2, DirichletSpec::Boundary).unwrap();
        let l = dof_layout(&m, SpaceKind::DiscPoly, 0).unwrap();
        let a4 = assemble_order2_matrix(&m, &l, 4).unwrap();
        let a5 = assemble_order2_matrix(&m, &l, 5).unwrap();
        assert!(order2_oracle_change(&a4, &a5) <= 0.01);
        assert!(crate::linalg::max_asymmetry(&a5) <= 1e-10);
        assert!(a5.symmetric_eigenvalues().min() > 0.0);
    }

    #[test]
    fn interval_oracle_matches_green_function() {
        let m = make_structured(Geometry::interval(), 1, DirichletSpec::Boundary).unwrap();
        let l = dof_layout(&m, SpaceKind::DiscPoly, 0).unwrap();
        let a = assemble_order2_matrix(&m, &l, 8).unwrap();
        // L u = 1 with zero boundary values: u = 1 − cosh(x − 1/2)/cosh(1/2), ∫u = 1 − 2 sinh(1/2)/cosh(1/2)
        let exact = 1.0 - 2.0 * (0.5f64).tanh();
        assert!((a[(0, 0)] - exact).abs() < 1e-4 * exact, "{} vs {exact}", a[(0, 0)]);
    }

    #[test]
    fn square_pair_is_spd() {
        let m = make_structured(Geometry::UnitSquare, 2, DirichletSpec::Boundary).unwrap();
        let comb = MeshCombinatorics::new(&m);
        let l = dof_layout(&m, SpaceKind::ContLinear, 1).unwrap();
        let p = assemble_order2_pair(&m, &comb, &l, 4, true).unwrap();
        assert!(p.oracle_change.unwrap() < 0.01);
        assert!(p.a.symmetric_eigenvalues().min() > 0.0);
        assert_eq!(p.bs.nrows(), comb.free_vertices.len());
        assert!(assemble_order2_pair(&m, &comb, &l, 1, false).is_err());
    }

    #[test]
    fn shared_oracle_matches_separate_builds() {
        let m = make_structured(Geometry::UnitSquare, 2, DirichletSpec::Boundary).unwrap();
        let comb = MeshCombinatorics::new(&m);
        let l0 = dof_layout(&m, SpaceKind::DiscPoly, 0).unwrap();
        let l1 = dof_layout(&m, SpaceKind::ContLinear, 1).unwrap();
        let both = assemble_order2_pairs(&m, &comb, &[&l0, &l1], 3, false).unwrap();
        for (l, p) in [&l0, &l1].into_iter().zip(&both) {
            let one = assemble_order2_pair(&m, &comb, l, 3, false).unwrap();
            assert_eq!(one.a, p.a);
            assert_eq!(one.oracle_change, p.oracle_change);
        }
        let other = make_structured(Geometry::UnitSquare, 3, DirichletSpec::Boundary).unwrap();
        let wrong = dof_layout(&other, SpaceKind::DiscPoly, 0).unwrap();
        assert!(Order2Oracle::new(&m, 2).unwrap().matrix(&wrong).is_err());
    }
}
