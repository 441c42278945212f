use std::collections::{BTreeSet, HashMap, HashSet};

use super::{ChartKind, Charts, SimplicialMesh};

/// For every cell of a uniformly refined mesh: the coarse ancestor and the
/// barycentric coordinates (w.r.t. the ancestor) of its local vertices.
#[derive(Debug, Clone)]
pub struct RefinementTrace {
    pub ancestor: Vec<usize>,
    /// Stride `(d+1)*(d+1)`; row `k` holds the coordinates of local vertex `k`.
    pub lambdas: Vec<f64>,
}

impl RefinementTrace {
    pub fn identity(mesh: &SimplicialMesh) -> Self {
        let n = mesh.dim() + 1;
        let mut lambdas = Vec::with_capacity(mesh.n_cells() * n * n);
        for _ in 0..mesh.n_cells() {
            for k in 0..n {
                for j in 0..n {
                    lambdas.push(if j == k { 1.0 } else { 0.0 });
                }
            }
        }
        RefinementTrace { ancestor: (0..mesh.n_cells()).collect(), lambdas }
    }

    pub fn lambda(&self, cell: usize, d: usize) -> &[f64] {
        let n = (d + 1) * (d + 1);
        &self.lambdas[cell * n..(cell + 1) * n]
    }
}

/// A child vertex is parent local vertex `i` when `i == j`, else the midpoint
/// of local edge `(i, j)`.
type Recipe = Vec<[usize; 2]>;

struct Builder<'a> {
    mesh: &'a SimplicialMesh,
    coords: Vec<f64>,
    params: Option<Vec<f64>>,
    midpoints: HashMap<[usize; 2], usize>,
}

impl<'a> Builder<'a> {
    fn new(mesh: &'a SimplicialMesh) -> Self {
        Builder {
            mesh,
            coords: mesh.coords().to_vec(),
            params: mesh.charts().filter(|c| matches!(c.kind, ChartKind::Ellipse { .. })).map(|c| c.params.clone()),
            midpoints: HashMap::new(),
        }
    }

    fn n_vertices(&self) -> usize {
        self.coords.len() / self.mesh.embed_dim()
    }

    fn midpoint(&mut self, a: usize, b: usize) -> usize {
        let key = [a.min(b), a.max(b)];
        if let Some(&m) = self.midpoints.get(&key) {
            return m;
        }
        let e = self.mesh.embed_dim();
        let m = self.n_vertices();
        match (&mut self.params, self.mesh.charts().map(|c| c.kind)) {
            (Some(params), Some(kind)) => {
                // parameters increase along each panel, wrapping once at 1
                let (ta, mut tb) = (params[a], params[b]);
                if tb <= ta {
                    tb += 1.0;
                }
                let mut t = 0.5 * (ta + tb);
                if t >= 1.0 {
                    t -= 1.0;
                }
                params.push(t);
                self.coords.extend_from_slice(&kind.eval(t)[..e]);
            }
            _ => {
                for k in 0..e {
                    let v = 0.5 * (self.coords[a * e + k] + self.coords[b * e + k]);
                    self.coords.push(v);
                }
            }
        }
        self.midpoints.insert(key, m);
        m
    }

    fn vertex_of(&mut self, parent: &[usize], r: [usize; 2]) -> usize {
        if r[0] == r[1] {
            parent[r[0]]
        } else {
            self.midpoint(parent[r[0]], parent[r[1]])
        }
    }

    fn finish(mut self, cells: Vec<usize>, labels: Option<Vec<u32>>) -> SimplicialMesh {
        let mesh = self.mesh;
        let mut dirichlet = BTreeSet::new();
        for f in mesh.dirichlet_faces() {
            if f.len() == 2 {
                if let Some(&m) = self.midpoints.get(&[f[0], f[1]]) {
                    dirichlet.insert(sorted(vec![f[0], m]));
                    dirichlet.insert(sorted(vec![m, f[1]]));
                    continue;
                }
            }
            dirichlet.insert(f.clone());
        }
        let charts = mesh.charts().map(|c| Charts {
            kind: c.kind,
            labels: labels.unwrap_or_default(),
            params: self.params.take().unwrap_or_default(),
        });
        SimplicialMesh::from_parts(
            mesh.dim(),
            mesh.embed_dim(),
            self.coords,
            cells,
            dirichlet,
            charts,
            mesh.corners().to_vec(),
        )
    }
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

fn red_recipes(d: usize) -> Vec<Recipe> {
    if d == 1 {
        vec![vec![[0, 0], [0, 1]], vec![[0, 1], [1, 1]]]
    } else {
        // children keep local edge (0,1) parallel to the parent's refinement edge
        vec![
            vec![[0, 0], [0, 1], [0, 2]],
            vec![[0, 1], [1, 1], [1, 2]],
            vec![[0, 2], [1, 2], [2, 2]],
            vec![[1, 2], [0, 2], [0, 1]],
        ]
    }
}

fn refine_with(mesh: &SimplicialMesh, recipes: &[Recipe]) -> (SimplicialMesh, Vec<(usize, usize)>) {
    let mut b = Builder::new(mesh);
    let mut cells = Vec::with_capacity(mesh.cells().len() * recipes.len());
    let mut origin = Vec::with_capacity(mesh.n_cells() * recipes.len());
    let mut labels = mesh.charts().map(|_| Vec::new());
    for c in 0..mesh.n_cells() {
        let parent = mesh.cell(c).to_vec();
        for (k, r) in recipes.iter().enumerate() {
            for &x in r {
                let v = b.vertex_of(&parent, x);
                cells.push(v);
            }
            origin.push((c, k));
            if let (Some(l), Some(ch)) = (labels.as_mut(), mesh.charts()) {
                l.push(ch.labels[c]);
            }
        }
    }
    (b.finish(cells, labels), origin)
}

/// Bisects every segment (d = 1) or splits every triangle into four
/// congruent children (d = 2).
pub fn uniform_refine(mesh: &SimplicialMesh) -> SimplicialMesh {
    refine_with(mesh, &red_recipes(mesh.dim())).0
}

/// Uniform refinement that also propagates a [`RefinementTrace`].
pub fn uniform_refine_traced(mesh: &SimplicialMesh, trace: &RefinementTrace) -> (SimplicialMesh, RefinementTrace) {
    let d = mesh.dim();
    let n = d + 1;
    let recipes = red_recipes(d);
    let (fine, origin) = refine_with(mesh, &recipes);
    let mut ancestor = Vec::with_capacity(origin.len());
    let mut lambdas = Vec::with_capacity(origin.len() * n * n);
    for &(c, k) in &origin {
        ancestor.push(trace.ancestor[c]);
        let pl = trace.lambda(c, d);
        for r in &recipes[k] {
            for j in 0..n {
                lambdas.push(0.5 * (pl[r[0] * n + j] + pl[r[1] * n + j]));
            }
        }
    }
    (fine, RefinementTrace { ancestor, lambdas })
}

/// Six children per triangle through the barycenter (two per segment).
pub fn barycentric_refine(mesh: &SimplicialMesh) -> SimplicialMesh {
    if mesh.dim() == 1 {
        return uniform_refine(mesh);
    }
    let mut b = Builder::new(mesh);
    let mut cells = Vec::with_capacity(mesh.cells().len() * 6);
    let e = mesh.embed_dim();
    for c in 0..mesh.n_cells() {
        let v = mesh.cell(c).to_vec();
        let center = b.n_vertices();
        for k in 0..e {
            let s: f64 = v.iter().map(|&i| mesh.coords()[i * e + k]).sum();
            b.coords.push(s / 3.0);
        }
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    let m = b.midpoint(v[i], v[j]);
                    cells.extend([v[i], m, center]);
                }
            }
        }
    }
    b.finish(cells, None)
}

/// Cells touching one of the mesh corners.
pub fn corner_cells(mesh: &SimplicialMesh) -> Vec<usize> {
    let corners: HashSet<usize> = mesh.corners().iter().copied().collect();
    (0..mesh.n_cells()).filter(|&c| mesh.cell(c).iter().any(|v| corners.contains(v))).collect()
}

/// Newest vertex bisection of the marked cells followed by the conforming
/// closure. For d = 1 marked segments are bisected.
pub fn nvb_refine(mesh: &SimplicialMesh, marked: &[usize]) -> SimplicialMesh {
    if marked.is_empty() {
        return mesh.clone();
    }
    let d = mesh.dim();
    let mut b = Builder::new(mesh);
    let mut cells = Vec::new();
    let mut labels = mesh.charts().map(|_| Vec::new());
    let label = |c: usize| mesh.charts().map(|ch| ch.labels[c]).unwrap_or(0);
    if d == 1 {
        let marked: HashSet<usize> = marked.iter().copied().collect();
        for c in 0..mesh.n_cells() {
            let v = mesh.cell(c);
            let kids = if marked.contains(&c) {
                let m = b.midpoint(v[0], v[1]);
                vec![v[0], m, m, v[1]]
            } else {
                v.to_vec()
            };
            if let Some(l) = labels.as_mut() {
                l.extend(std::iter::repeat_n(label(c), kids.len() / 2));
            }
            cells.extend(kids);
        }
        return b.finish(cells, labels);
    }
    let key = |a: usize, b: usize| [a.min(b), a.max(b)];
    let mut edges: HashSet<[usize; 2]> = HashSet::new();
    for &c in marked {
        let v = mesh.cell(c);
        edges.insert(key(v[0], v[1]));
    }
    // closure: a cell with any marked edge must have its refinement edge marked
    loop {
        let mut changed = false;
        for c in 0..mesh.n_cells() {
            let v = mesh.cell(c);
            let re = key(v[0], v[1]);
            if !edges.contains(&re)
                && (edges.contains(&key(v[1], v[2])) || edges.contains(&key(v[2], v[0])))
            {
                edges.insert(re);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    fn bisect(
        b: &mut Builder,
        edges: &HashSet<[usize; 2]>,
        t: [usize; 3],
        depth: usize,
        out: &mut Vec<[usize; 3]>,
    ) {
        let [a, bb, c] = t;
        if depth < 3 && edges.contains(&[a.min(bb), a.max(bb)]) {
            let m = b.midpoint(a, bb);
            bisect(b, edges, [c, a, m], depth + 1, out);
            bisect(b, edges, [bb, c, m], depth + 1, out);
        } else {
            out.push(t);
        }
    }
    for c in 0..mesh.n_cells() {
        let v = mesh.cell(c);
        let mut out = Vec::new();
        bisect(&mut b, &edges, [v[0], v[1], v[2]], 0, &mut out);
        if let Some(l) = labels.as_mut() {
            l.extend(std::iter::repeat_n(label(c), out.len()));
        }
        for t in out {
            cells.extend(t);
        }
    }
    b.finish(cells, labels)
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use super::*;

    #[test]
    fn uniform_counts() {
        let cube = make_structured(Geometry::CubeSurface, 1, DirichletSpec::None).unwrap();
        let r = uniform_refine(&cube);
        assert_eq!(r.n_cells(), 48);
        r.check_conformity().unwrap();
        let poly = make_structured(Geometry::closed_polygon(4), 1, DirichletSpec::None).unwrap();
        let r = uniform_refine(&poly);
        assert_eq!(r.n_cells(), 8);
        assert!(MeshCombinatorics::new(&r).valence.iter().all(|&v| v == 2));
        let iv = uniform_refine(&uniform_refine(&make_structured(Geometry::interval(), 1, DirichletSpec::None).unwrap()));
        for c in 0..4 {
            assert!((iv.volume(c) - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn red_children_are_congruent() {
        let sq = make_structured(Geometry::UnitSquare, 1, DirichletSpec::Boundary).unwrap();
        let r = uniform_refine(&sq);
        for c in 0..r.n_cells() {
            assert!((r.volume(c) - 0.125).abs() < 1e-15);
        }
        assert_eq!(r.dirichlet_faces().len(), 8);
        assert!((r.min_angle() - sq.min_angle()).abs() < 1e-12);
    }

    #[test]
    fn barycentric_counts() {
        let cube = make_structured(Geometry::CubeSurface, 1, DirichletSpec::None).unwrap();
        assert_eq!(barycentric_refine(&cube).n_cells(), 72);
        let tri = SimplicialMesh::new(2, 2, vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0], vec![0, 1, 2], vec![]).unwrap();
        let b = barycentric_refine(&tri);
        assert_eq!(b.n_cells(), 6);
        b.check_conformity().unwrap();
        let comb = MeshCombinatorics::new(&b);
        assert_eq!(comb.valence[3], 6);
        let iv = make_structured(Geometry::interval(), 2, DirichletSpec::None).unwrap();
        assert_eq!(barycentric_refine(&iv).n_cells(), 4);
    }

    #[test]
    fn nvb_empty_marking_is_identity() {
        let sq = make_structured(Geometry::UnitSquare, 2, DirichletSpec::None).unwrap();
        assert_eq!(nvb_refine(&sq, &[]), sq);
    }

    #[test]
    fn nvb_interval_leftmost() {
        let mut m = make_structured(Geometry::interval(), 1, DirichletSpec::None).unwrap();
        for _ in 0..10 {
            m = nvb_refine(&m, &[0]);
        }
        assert!((m.volume(0) - 2f64.powi(-10)).abs() < 1e-18);
        assert!(MeshCombinatorics::new(&m).kmesh_ratio.unwrap() <= 2.0 + 1e-12);
    }

    #[test]
    fn nvb_cube_corners_conforming() {
        let mut m = make_structured(Geometry::CubeSurface, 1, DirichletSpec::None).unwrap();
        let mut hmin = m.h_min();
        for _ in 0..8 {
            let marked = corner_cells(&m);
            m = nvb_refine(&m, &marked);
            m.check_conformity().unwrap();
            assert!(m.h_min() < hmin);
            hmin = m.h_min();
            assert!((m.total_volume() - 6.0).abs() < 1e-12);
        }
    }

    #[test]
    fn traced_lambdas_reproduce_coordinates() {
        let sq = make_structured(Geometry::UnitSquare, 1, DirichletSpec::None).unwrap();
        let mut t = RefinementTrace::identity(&sq);
        let mut m = sq.clone();
        for _ in 0..2 {
            let (m2, t2) = uniform_refine_traced(&m, &t);
            m = m2;
            t = t2;
        }
        for c in 0..m.n_cells() {
            let a = sq.cell(t.ancestor[c]);
            let l = t.lambda(c, 2);
            for k in 0..3 {
                let p = m.point(m.cell(c)[k]);
                for x in 0..2 {
                    let q: f64 = (0..3).map(|j| l[k * 3 + j] * sq.point(a[j])[x]).sum();
                    assert!((p[x] - q).abs() < 1e-15);
                }
            }
        }
    }
}
