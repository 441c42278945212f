//! Explicit bubble functions biorthogonal to the trial basis. They only
//! serve as oracles: the preconditioner never references them.

use nalgebra::DMatrix;

use super::layout::{DofLayout, SpaceKind};
use super::quadrature::{simplex_rule, split_rule, SimplexRule};
use crate::linalg::CsrMatrix;
use crate::mesh::{MeshCombinatorics, SimplicialMesh};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BubbleKind {
    /// `b_T = ∏ λ_i` times local polynomials.
    ElementPoly,
    /// `(d+1)` times the hat at the barycenter of the barycentric refinement.
    BarycentricHat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Generator {
    /// `c · b_T`
    Bubble,
    /// `b_T · Σ_k c_k g_k` with `g_k` the local functions of the layout
    BubbleTimesLocal,
    /// `c · min_i λ_i`
    Hat,
}

/// One bubble per trial dof; bubble `j` is paired with dof `j`.
#[derive(Debug, Clone)]
pub struct BubbleSet {
    pub kind: BubbleKind,
    /// Cell carrying each bubble.
    pub cell: Vec<usize>,
    /// Target value of `⟨θ_j, ξ_j⟩`.
    pub normalization: Vec<f64>,
    coeffs: Vec<f64>,
    n_gen: usize,
    generator: Generator,
    cell_bubbles: Vec<Vec<usize>>,
}

impl BubbleSet {
    pub fn len(&self) -> usize {
        self.cell.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cell.is_empty()
    }

    /// Bubbles supported in cell `c`.
    pub fn in_cell(&self, c: usize) -> &[usize] {
        &self.cell_bubbles[c]
    }

    /// Value of bubble `j` at barycentric point `lambda` of its cell, given
    /// the layout's local function values there.
    pub fn eval(&self, j: usize, lambda: &[f64], local_vals: &[f64]) -> f64 {
        let c = &self.coeffs[j * self.n_gen..(j + 1) * self.n_gen];
        match self.generator {
            Generator::Bubble => c[0] * lambda.iter().product::<f64>(),
            Generator::BubbleTimesLocal => {
                let b: f64 = lambda.iter().product();
                b * c.iter().zip(local_vals).map(|(a, g)| a * g).sum::<f64>()
            }
            Generator::Hat => c[0] * lambda.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }

    /// Quadrature exact for products of bubbles with trial functions.
    pub fn rule(&self, dim: usize, degree: usize) -> SimplexRule {
        let deg = 2 * degree + 2 * (dim + 1);
        match self.kind {
            BubbleKind::ElementPoly => simplex_rule(dim, deg),
            BubbleKind::BarycentricHat => split_rule(dim, deg),
        }
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `mean(b_T g_k g_l)` over the reference simplex.
fn weighted_gram(layout: &DofLayout, cell: usize, rule: &SimplexRule) -> DMatrix<f64> {
    let nl = layout.n_local();
    let mut g = DMatrix::zeros(nl, nl);
    let mut v = vec![0.0; nl];
    for k in 0..rule.len() {
        let lam = rule.point(k);
        layout.eval_local(cell, lam, &mut v);
        let b: f64 = lam.iter().product();
        for i in 0..nl {
            for j in 0..nl {
                g[(i, j)] += rule.weights[k] * b * v[i] * v[j];
            }
        }
    }
    g
}

/// Realizes bubbles with `⟨θ_j, ξ_i⟩ = δ_ij · normalization_j`.
///
/// Supported: discontinuous layouts of any degree (element bubbles),
/// piecewise constants with barycentric hats, continuous piecewise linears
/// (element bubbles on one incident cell, preferring cells that touch γ so
/// that the dual functions sum to one away from the Dirichlet strip).
pub fn realize_bubbles(
    mesh: &SimplicialMesh,
    comb: &MeshCombinatorics,
    layout: &DofLayout,
    kind: BubbleKind,
) -> Result<BubbleSet> {
    let d = mesh.dim();
    let nc = mesh.n_cells();
    let mut cell = Vec::new();
    let mut normalization = Vec::new();
    let mut coeffs = Vec::new();
    let (generator, n_gen) = match (layout.kind, layout.degree, kind) {
        (SpaceKind::DiscPoly, 0, BubbleKind::ElementPoly) => {
            let c = factorial(2 * d + 1) / d as f64;
            for t in 0..nc {
                cell.push(t);
                normalization.push(comb.volume[t]);
                coeffs.push(c);
            }
            (Generator::Bubble, 1)
        }
        (SpaceKind::DiscPoly, 0, BubbleKind::BarycentricHat) => {
            let c = ((d + 1) * (d + 1)) as f64;
            for t in 0..nc {
                cell.push(t);
                normalization.push(comb.volume[t]);
                coeffs.push(c);
            }
            (Generator::Hat, 1)
        }
        (SpaceKind::DiscPoly, _, BubbleKind::ElementPoly) => {
            let nl = layout.n_local();
            let rule = simplex_rule(d, 2 * layout.degree + d + 1);
            // affine invariance: the reference solve serves every cell
            let inv = weighted_gram(layout, 0, &rule).try_inverse().ok_or(Error::NotPositiveDefinite)?;
            let mut rows = vec![Vec::new(); layout.n_dofs()];
            for t in 0..nc {
                for (i, &dof) in layout.cell_dofs(t).iter().enumerate() {
                    rows[dof] = (0..nl).map(|k| inv[(i, k)]).collect();
                }
            }
            for (dof, r) in rows.into_iter().enumerate() {
                let t = if dof < nc { dof } else { (dof - nc) / (nl - 1) };
                cell.push(t);
                normalization.push(comb.volume[t]);
                coeffs.extend(r);
            }
            (Generator::BubbleTimesLocal, nl)
        }
        (SpaceKind::ContLinear, 1, BubbleKind::ElementPoly) => {
            let rule = simplex_rule(d, d + 3);
            for v in 0..mesh.n_vertices() {
                let cells = &comb.vertex_cells[v];
                let t = cells.iter().copied().find(|&c| comb.touches_gamma(c)).unwrap_or(cells[0]);
                let local = mesh.cell(t).iter().position(|&x| x == v).unwrap();
                let inv = weighted_gram(layout, t, &rule).try_inverse().ok_or(Error::NotPositiveDefinite)?;
                let scale = comb.patch_volume[v] / comb.volume[t];
                cell.push(t);
                normalization.push(comb.patch_volume[v]);
                coeffs.extend((0..=d).map(|k| scale * inv[(local, k)]));
            }
            (Generator::BubbleTimesLocal, d + 1)
        }
        _ => {
            return Err(Error::Unsupported(format!(
                "{kind:?} bubbles for {:?} of degree {}",
                layout.kind, layout.degree
            )))
        }
    };
    let mut cell_bubbles = vec![Vec::new(); nc];
    for (j, &t) in cell.iter().enumerate() {
        cell_bubbles[t].push(j);
    }
    Ok(BubbleSet { kind, cell, normalization, coeffs, n_gen, generator, cell_bubbles })
}

/// `⟨θ_b, ξ_j⟩` (bubbles × trial dofs).
pub fn bubble_trial_mass(mesh: &SimplicialMesh, layout: &DofLayout, bubbles: &BubbleSet) -> CsrMatrix {
    let rule = bubbles.rule(mesh.dim(), layout.degree);
    let nl = layout.n_local();
    let mut v = vec![0.0; nl];
    let mut t = Vec::new();
    for c in 0..mesh.n_cells() {
        let bs = bubbles.in_cell(c);
        if bs.is_empty() {
            continue;
        }
        let vol = mesh.volume(c);
        let mut local = vec![0.0; bs.len() * nl];
        for k in 0..rule.len() {
            let lam = rule.point(k);
            layout.eval_local(c, lam, &mut v);
            for (a, &b) in bs.iter().enumerate() {
                let th = bubbles.eval(b, lam, &v);
                for i in 0..nl {
                    local[a * nl + i] += rule.weights[k] * th * v[i];
                }
            }
        }
        let dofs = layout.cell_dofs(c);
        for (a, &b) in bs.iter().enumerate() {
            for i in 0..nl {
                t.push((b, dofs[i], vol * local[a * nl + i]));
            }
        }
    }
    CsrMatrix::from_triplets(bubbles.len(), layout.n_dofs(), &t)
}

/// Gram matrix of the normalized bubbles `θ_j/∥θ_j∥`.
pub fn bubble_gram(mesh: &SimplicialMesh, layout: &DofLayout, bubbles: &BubbleSet) -> CsrMatrix {
    let rule = bubbles.rule(mesh.dim(), layout.degree);
    let nl = layout.n_local();
    let mut v = vec![0.0; nl];
    let mut t = Vec::new();
    for c in 0..mesh.n_cells() {
        let bs = bubbles.in_cell(c);
        let vol = mesh.volume(c);
        let mut local = vec![0.0; bs.len() * bs.len()];
        for k in 0..rule.len() {
            let lam = rule.point(k);
            layout.eval_local(c, lam, &mut v);
            let th: Vec<f64> = bs.iter().map(|&b| bubbles.eval(b, lam, &v)).collect();
            for a in 0..bs.len() {
                for b in 0..bs.len() {
                    local[a * bs.len() + b] += rule.weights[k] * th[a] * th[b];
                }
            }
        }
        for a in 0..bs.len() {
            for b in 0..bs.len() {
                t.push((bs[a], bs[b], vol * local[a * bs.len() + b]));
            }
        }
    }
    let g = CsrMatrix::from_triplets(bubbles.len(), bubbles.len(), &t);
    let n = bubbles.len();
    let s: Vec<f64> = (0..n).map(|i| 1.0 / g.get(i, i).sqrt()).collect();
    g.scale_rows(&s).scale_cols(&s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::layout::dof_layout;
    use crate::mesh::{make_structured, DirichletSpec, Geometry, SimplicialMesh};

    #[test]
    fn element_bubble_integrates_to_volume() {
        let tri = SimplicialMesh::new(2, 2, vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0], vec![0, 1, 2], vec![]).unwrap();
        let comb = MeshCombinatorics::new(&tri);
        let l = dof_layout(&tri, SpaceKind::DiscPoly, 0).unwrap();
        for kind in [BubbleKind::ElementPoly, BubbleKind::BarycentricHat] {
            let b = realize_bubbles(&tri, &comb, &l, kind).unwrap();
            let m = bubble_trial_mass(&tri, &l, &b);
            assert!((m.get(0, 0) - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn hat_bubble_on_segment() {
        let h = 0.3;
        let m = make_structured(Geometry::Interval { length: h }, 1, DirichletSpec::None).unwrap();
        let comb = MeshCombinatorics::new(&m);
        let l = dof_layout(&m, SpaceKind::DiscPoly, 0).unwrap();
        let b = realize_bubbles(&m, &comb, &l, BubbleKind::BarycentricHat).unwrap();
        // value at midpoint is d+1 = 2 times the unit hat
        assert!((b.eval(0, &[0.5, 0.5], &[1.0]) - 2.0).abs() < 1e-15);
        assert!((bubble_trial_mass(&m, &l, &b).get(0, 0) - h).abs() < 1e-15);
    }

    #[test]
    fn hat_unsupported_for_higher_order() {
        let m = make_structured(Geometry::interval(), 2, DirichletSpec::None).unwrap();
        let comb = MeshCombinatorics::new(&m);
        let l = dof_layout(&m, SpaceKind::DiscPoly, 2).unwrap();
        assert!(realize_bubbles(&m, &comb, &l, BubbleKind::BarycentricHat).is_err());
    }
}
