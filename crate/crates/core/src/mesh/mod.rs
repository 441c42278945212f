//! Conforming simplicial meshes of intervals, closed polygonal curves, the
//! unit square and the surface of the unit cube.
//!
//! Cells store their vertices in a fixed local order. For triangles the
//! local edge `(0, 1)` is the refinement edge used by newest vertex
//! bisection and local vertex `2` is the newest vertex.

mod combinatorics;
mod format;
mod refine;

use std::collections::{BTreeSet, HashMap};
use std::f64::consts::PI;

pub use combinatorics::MeshCombinatorics;
pub use format::{read_mesh, write_mesh};
pub use refine::{
    barycentric_refine, corner_cells, nvb_refine, uniform_refine, uniform_refine_traced, RefinementTrace,
};

use crate::{Error, Result};

/// Parametrization attached to a closed curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChartKind {
    /// `t -> (a cos 2πt, b sin 2πt)` on `[0, 1)`; vertices lie on the ellipse
    /// and panels are its chords.
    Ellipse { a: f64, b: f64 },
    /// Each panel is its own isometric affine chart.
    PanelAffine,
}

impl ChartKind {
    pub fn eval(&self, t: f64) -> [f64; 2] {
        match *self {
            ChartKind::Ellipse { a, b } => [a * (2.0 * PI * t).cos(), b * (2.0 * PI * t).sin()],
            ChartKind::PanelAffine => [t, 0.0],
        }
    }

    /// Speed `|χ'(t)|`.
    pub fn speed(&self, t: f64) -> f64 {
        match *self {
            ChartKind::Ellipse { a, b } => {
                let w = 2.0 * PI;
                w * ((a * (w * t).sin()).powi(2) + (b * (w * t).cos()).powi(2)).sqrt()
            }
            ChartKind::PanelAffine => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Charts {
    pub kind: ChartKind,
    /// One label per cell.
    pub labels: Vec<u32>,
    /// Chart parameter per vertex (ellipse charts only).
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplicialMesh {
    dim: usize,
    embed_dim: usize,
    coords: Vec<f64>,
    cells: Vec<usize>,
    dirichlet: BTreeSet<Vec<usize>>,
    charts: Option<Charts>,
    corners: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Geometry {
    /// `[0, length]`.
    Interval { length: f64 },
    /// Regular polygon with vertices on the circle of the given radius.
    ClosedPolygon { sides: usize, radius: f64 },
    /// Closed polygon inscribed in an ellipse, with the ellipse chart attached.
    Ellipse { a: f64, b: f64 },
    UnitSquare,
    CubeSurface,
}

impl Geometry {
    /// Regular polygon of diameter at most 1/2.
    pub fn closed_polygon(sides: usize) -> Self {
        Geometry::ClosedPolygon { sides, radius: 0.25 }
    }

    pub fn interval() -> Self {
        Geometry::Interval { length: 1.0 }
    }

    pub fn ellipse() -> Self {
        Geometry::Ellipse { a: 0.25, b: 0.15 }
    }

    pub fn is_closed(&self) -> bool {
        matches!(self, Geometry::ClosedPolygon { .. } | Geometry::Ellipse { .. } | Geometry::CubeSurface)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum DirichletSpec {
    #[default]
    None,
    /// The whole boundary of the domain.
    Boundary,
    /// Explicit faces of the initial mesh.
    Faces(Vec<Vec<usize>>),
}

impl SimplicialMesh {
    /// Validating constructor. `coords` has stride `embed_dim`, `cells`
    /// stride `dim + 1`, every Dirichlet face has `dim` vertices.
    pub fn new(
        dim: usize,
        embed_dim: usize,
        coords: Vec<f64>,
        cells: Vec<usize>,
        dirichlet: Vec<Vec<usize>>,
    ) -> Result<Self> {
        if !(1..=2).contains(&dim) || !(dim..=3).contains(&embed_dim) {
            return Err(Error::InvalidMesh(format!("dimensions d={dim}, d'={embed_dim} not supported")));
        }
        if coords.len() % embed_dim != 0 || cells.len() % (dim + 1) != 0 {
            return Err(Error::InvalidMesh("coordinate or cell array has wrong length".into()));
        }
        let mut mesh = SimplicialMesh {
            dim,
            embed_dim,
            coords,
            cells,
            dirichlet: BTreeSet::new(),
            charts: None,
            corners: Vec::new(),
        };
        let nv = mesh.n_vertices();
        if mesh.cells.iter().any(|&v| v >= nv) {
            return Err(Error::InvalidMesh("cell references a missing vertex".into()));
        }
        for c in 0..mesh.n_cells() {
            let vol = mesh.volume(c);
            if !(vol > 0.0) {
                return Err(Error::InvalidMesh(format!("cell {c} has non-positive volume {vol}")));
            }
        }
        let faces = mesh.face_cells();
        for f in dirichlet {
            let mut f = f;
            f.sort_unstable();
            if f.len() != dim || !faces.contains_key(&f) {
                return Err(Error::InvalidMesh(format!("dirichlet face {f:?} is not a mesh face")));
            }
            mesh.dirichlet.insert(f);
        }
        Ok(mesh)
    }

    pub(crate) fn from_parts(
        dim: usize,
        embed_dim: usize,
        coords: Vec<f64>,
        cells: Vec<usize>,
        dirichlet: BTreeSet<Vec<usize>>,
        charts: Option<Charts>,
        corners: Vec<usize>,
    ) -> Self {
        SimplicialMesh { dim, embed_dim, coords, cells, dirichlet, charts, corners }
    }

    pub fn with_charts(mut self, charts: Charts) -> Result<Self> {
        if charts.labels.len() != self.n_cells() {
            return Err(Error::InvalidMesh("one chart label per cell required".into()));
        }
        if matches!(charts.kind, ChartKind::Ellipse { .. }) && charts.params.len() != self.n_vertices() {
            return Err(Error::InvalidMesh("ellipse chart needs one parameter per vertex".into()));
        }
        self.charts = Some(charts);
        Ok(self)
    }

    pub fn with_corners(mut self, corners: Vec<usize>) -> Self {
        self.corners = corners;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn embed_dim(&self) -> usize {
        self.embed_dim
    }

    pub fn n_vertices(&self) -> usize {
        self.coords.len() / self.embed_dim
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len() / (self.dim + 1)
    }

    pub fn vertex(&self, i: usize) -> &[f64] {
        &self.coords[i * self.embed_dim..(i + 1) * self.embed_dim]
    }

    /// Vertex coordinates padded to three components.
    pub fn point(&self, i: usize) -> [f64; 3] {
        let mut p = [0.0; 3];
        p[..self.embed_dim].copy_from_slice(self.vertex(i));
        p
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        &self.cells[c * (self.dim + 1)..(c + 1) * (self.dim + 1)]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn dirichlet_faces(&self) -> &BTreeSet<Vec<usize>> {
        &self.dirichlet
    }

    pub fn charts(&self) -> Option<&Charts> {
        self.charts.as_ref()
    }

    /// Vertices kept as geometric corners for corner-local refinement.
    pub fn corners(&self) -> &[usize] {
        &self.corners
    }

    /// Flags vertices lying on γ.
    pub fn dirichlet_vertices(&self) -> Vec<bool> {
        let mut on = vec![false; self.n_vertices()];
        for f in &self.dirichlet {
            for &v in f {
                on[v] = true;
            }
        }
        on
    }

    /// Volume of cell `c` from embedded vertex coordinates.
    pub fn volume(&self, c: usize) -> f64 {
        let v = self.cell(c);
        let p0 = self.point(v[0]);
        let p1 = self.point(v[1]);
        let e1 = sub(&p1, &p0);
        if self.dim == 1 {
            return norm(&e1);
        }
        let e2 = sub(&self.point(v[2]), &p0);
        0.5 * norm(&cross(&e1, &e2))
    }

    pub fn total_volume(&self) -> f64 {
        (0..self.n_cells()).map(|c| self.volume(c)).sum()
    }

    /// `min_T |T|^{1/d}`.
    pub fn h_min(&self) -> f64 {
        let d = self.dim as f64;
        (0..self.n_cells()).map(|c| self.volume(c).powf(1.0 / d)).fold(f64::INFINITY, f64::min)
    }

    /// Map from sorted (d-1)-faces to incident cells.
    pub fn face_cells(&self) -> HashMap<Vec<usize>, Vec<usize>> {
        let mut map: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
        for c in 0..self.n_cells() {
            let v = self.cell(c);
            for skip in 0..=self.dim {
                let mut f: Vec<usize> =
                    v.iter().enumerate().filter(|&(k, _)| k != skip).map(|(_, &x)| x).collect();
                f.sort_unstable();
                map.entry(f).or_default().push(c);
            }
        }
        map
    }

    /// Sorted list of faces with exactly one incident cell.
    pub fn boundary_faces(&self) -> Vec<Vec<usize>> {
        let mut b: Vec<Vec<usize>> =
            self.face_cells().into_iter().filter(|(_, cs)| cs.len() == 1).map(|(f, _)| f).collect();
        b.sort();
        b
    }

    /// Global edges of a triangle mesh (sorted vertex pairs, in first-seen
    /// order) and per cell the global index of local edges `(0,1), (1,2),
    /// (2,0)`.
    pub fn edges(&self) -> (Vec<[usize; 2]>, Vec<[usize; 3]>) {
        assert_eq!(self.dim, 2);
        let mut index: HashMap<[usize; 2], usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut cell_edges = Vec::with_capacity(self.n_cells());
        for c in 0..self.n_cells() {
            let v = self.cell(c);
            let mut ce = [0usize; 3];
            for (k, slot) in ce.iter_mut().enumerate() {
                let (a, b) = (v[k], v[(k + 1) % 3]);
                let key = [a.min(b), a.max(b)];
                *slot = *index.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edges.len() - 1
                });
            }
            cell_edges.push(ce);
        }
        (edges, cell_edges)
    }

    /// Face-incidence audit: every face has at most two cells and no
    /// boundary face carries a hanging vertex at its midpoint.
    pub fn check_conformity(&self) -> Result<()> {
        let faces = self.face_cells();
        let mut seen = BTreeSet::new();
        for c in 0..self.n_cells() {
            let mut v = self.cell(c).to_vec();
            v.sort_unstable();
            if v.windows(2).any(|w| w[0] == w[1]) || !seen.insert(v) {
                return Err(Error::InvalidMesh(format!("cell {c} is degenerate or duplicated")));
            }
        }
        for (f, cs) in &faces {
            if cs.len() > 2 {
                return Err(Error::InvalidMesh(format!("face {f:?} shared by {} cells", cs.len())));
            }
        }
        if self.dim == 2 {
            let key = |p: [f64; 3]| p.map(f64::to_bits);
            let verts: std::collections::HashSet<[u64; 3]> =
                (0..self.n_vertices()).map(|i| key(self.point(i))).collect();
            for (f, cs) in &faces {
                if cs.len() == 1 {
                    let (a, b) = (self.point(f[0]), self.point(f[1]));
                    let m = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])];
                    if verts.contains(&key(m)) {
                        return Err(Error::InvalidMesh(format!("hanging vertex on face {f:?}")));
                    }
                }
            }
        }
        for f in &self.dirichlet {
            if !faces.contains_key(f) {
                return Err(Error::InvalidMesh(format!("dirichlet face {f:?} is not a mesh face")));
            }
        }
        Ok(())
    }

    /// Smallest interior angle over all triangles, in radians.
    pub fn min_angle(&self) -> f64 {
        assert_eq!(self.dim, 2);
        let mut m = f64::INFINITY;
        for c in 0..self.n_cells() {
            let v = self.cell(c);
            for k in 0..3 {
                let p = self.point(v[k]);
                let a = sub(&self.point(v[(k + 1) % 3]), &p);
                let b = sub(&self.point(v[(k + 2) % 3]), &p);
                let cos = dot3(&a, &b) / (norm(&a) * norm(&b));
                m = m.min(cos.clamp(-1.0, 1.0).acos());
            }
        }
        m
    }
}

pub(crate) fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm(a: &[f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

pub(crate) fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Builds the coarsest mesh of a built-in geometry. `initial_elements` is
/// the number of cells per side (per unit length for the interval, in total
/// for the ellipse).
pub fn make_structured(geometry: Geometry, initial_elements: usize, dirichlet: DirichletSpec) -> Result<SimplicialMesh> {
    if initial_elements == 0 {
        return Err(Error::InvalidArgument("initial_elements must be at least 1".into()));
    }
    if geometry.is_closed() && dirichlet != DirichletSpec::None {
        return Err(Error::InvalidArgument("a closed manifold has no boundary to carry γ".into()));
    }
    let k = initial_elements;
    let mesh = match geometry {
        Geometry::Interval { length } => {
            if !(length > 0.0) {
                return Err(Error::InvalidArgument("interval length must be positive".into()));
            }
            let coords: Vec<f64> = (0..=k).map(|i| length * i as f64 / k as f64).collect();
            let cells: Vec<usize> = (0..k).flat_map(|i| [i, i + 1]).collect();
            let faces = match &dirichlet {
                DirichletSpec::None => vec![],
                DirichletSpec::Boundary => vec![vec![0], vec![k]],
                DirichletSpec::Faces(f) => f.clone(),
            };
            SimplicialMesh::new(1, 1, coords, cells, faces)?.with_corners(vec![0, k])
        }
        Geometry::ClosedPolygon { sides, radius } => {
            if sides < 3 || !(radius > 0.0) {
                return Err(Error::InvalidArgument("a closed polygon needs at least 3 sides".into()));
            }
            let n = sides * k;
            let mut coords = Vec::with_capacity(2 * n);
            for s in 0..sides {
                let a0 = 2.0 * PI * s as f64 / sides as f64 + PI / sides as f64;
                let a1 = 2.0 * PI * (s + 1) as f64 / sides as f64 + PI / sides as f64;
                let (p0, p1) = ([radius * a0.cos(), radius * a0.sin()], [radius * a1.cos(), radius * a1.sin()]);
                for i in 0..k {
                    let t = i as f64 / k as f64;
                    coords.push(p0[0] + t * (p1[0] - p0[0]));
                    coords.push(p0[1] + t * (p1[1] - p0[1]));
                }
            }
            let cells: Vec<usize> = (0..n).flat_map(|i| [i, (i + 1) % n]).collect();
            let corners = (0..sides).map(|s| s * k).collect();
            SimplicialMesh::new(1, 2, coords, cells, vec![])?.with_corners(corners)
        }
        Geometry::Ellipse { a, b } => {
            if k < 3 || !(a > 0.0 && b > 0.0) {
                return Err(Error::InvalidArgument("an ellipse mesh needs at least 3 panels".into()));
            }
            let kind = ChartKind::Ellipse { a, b };
            let params: Vec<f64> = (0..k).map(|i| i as f64 / k as f64).collect();
            let coords: Vec<f64> = params.iter().flat_map(|&t| kind.eval(t)).collect();
            let cells: Vec<usize> = (0..k).flat_map(|i| [i, (i + 1) % k]).collect();
            SimplicialMesh::new(1, 2, coords, cells, vec![])?
                .with_charts(Charts { kind, labels: vec![0; k], params })?
                .with_corners((0..k).collect())
        }
        Geometry::UnitSquare => {
            let id = |i: usize, j: usize| j * (k + 1) + i;
            let mut coords = Vec::new();
            for j in 0..=k {
                for i in 0..=k {
                    coords.push(i as f64 / k as f64);
                    coords.push(j as f64 / k as f64);
                }
            }
            let mut cells = Vec::new();
            for j in 0..k {
                for i in 0..k {
                    // hypotenuse first: local edge (0,1) is the longest edge
                    cells.extend([id(i, j), id(i + 1, j + 1), id(i + 1, j)]);
                    cells.extend([id(i + 1, j + 1), id(i, j), id(i, j + 1)]);
                }
            }
            let mesh = SimplicialMesh::new(2, 2, coords, cells, vec![])?;
            let faces = match &dirichlet {
                DirichletSpec::None => vec![],
                DirichletSpec::Boundary => mesh.boundary_faces(),
                DirichletSpec::Faces(f) => f.clone(),
            };
            let corners = vec![id(0, 0), id(k, 0), id(k, k), id(0, k)];
            SimplicialMesh::new(2, 2, mesh.coords, mesh.cells, faces)?.with_corners(corners)
        }
        Geometry::CubeSurface => cube_surface(k)?,
    };
    mesh.check_conformity()?;
    Ok(mesh)
}

fn cube_surface(k: usize) -> Result<SimplicialMesh> {
    let mut index: HashMap<[usize; 3], usize> = HashMap::new();
    let mut coords = Vec::new();
    let mut cells = Vec::new();
    let mut vid = |p: [usize; 3], coords: &mut Vec<f64>| -> usize {
        *index.entry(p).or_insert_with(|| {
            coords.extend(p.map(|x| x as f64 / k as f64));
            coords.len() / 3 - 1
        })
    };
    for axis in 0..3 {
        for side in [0, k] {
            let (u, w) = ((axis + 1) % 3, (axis + 2) % 3);
            let lattice = |i: usize, j: usize| {
                let mut p = [0usize; 3];
                p[axis] = side;
                p[u] = i;
                p[w] = j;
                p
            };
            for j in 0..k {
                for i in 0..k {
                    let a = vid(lattice(i, j), &mut coords);
                    let b = vid(lattice(i + 1, j), &mut coords);
                    let c = vid(lattice(i + 1, j + 1), &mut coords);
                    let d = vid(lattice(i, j + 1), &mut coords);
                    cells.extend([a, c, b]);
                    cells.extend([c, a, d]);
                }
            }
        }
    }
    let corner_lattice: Vec<[usize; 3]> =
        (0..8).map(|m| [(m & 1) * k, ((m >> 1) & 1) * k, ((m >> 2) & 1) * k]).collect();
    let corners = corner_lattice.iter().map(|p| index[p]).collect();
    Ok(SimplicialMesh::new(2, 3, coords, cells, vec![])?.with_corners(corners))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_surface_coarsest() {
        let m = make_structured(Geometry::CubeSurface, 1, DirichletSpec::None).unwrap();
        assert_eq!(m.n_cells(), 12);
        assert_eq!(m.n_vertices(), 8);
        assert!((m.total_volume() - 6.0).abs() < 1e-14);
        assert!(m.boundary_faces().is_empty());
        assert_eq!(m.corners().len(), 8);
    }

    #[test]
    fn single_interval() {
        let m = make_structured(Geometry::interval(), 1, DirichletSpec::None).unwrap();
        assert_eq!((m.n_cells(), m.n_vertices()), (1, 2));
        let c = MeshCombinatorics::new(&m);
        assert_eq!(c.free_vertices, vec![0, 1]);
    }

    #[test]
    fn square_polygon_counts() {
        let m = make_structured(Geometry::ClosedPolygon { sides: 4, radius: 0.5f64.sqrt() }, 1, DirichletSpec::None)
            .unwrap();
        assert_eq!((m.n_cells(), m.n_vertices()), (4, 4));
        let c = MeshCombinatorics::new(&m);
        assert!(c.valence.iter().all(|&v| v == 2));
        for t in 0..4 {
            assert!((c.volume[t] - 1.0).abs() < 1e-15);
        }
        for v in 0..4 {
            assert!((c.patch_volume[v] - 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn closed_manifold_rejects_dirichlet() {
        assert!(make_structured(Geometry::CubeSurface, 1, DirichletSpec::Boundary).is_err());
        assert!(make_structured(Geometry::closed_polygon(5), 1, DirichletSpec::Boundary).is_err());
        assert!(make_structured(Geometry::interval(), 0, DirichletSpec::None).is_err());
    }

    #[test]
    fn unit_square_boundary() {
        let m = make_structured(Geometry::UnitSquare, 1, DirichletSpec::Boundary).unwrap();
        assert_eq!(m.n_cells(), 2);
        assert_eq!(m.dirichlet_faces().len(), 4);
        let c = MeshCombinatorics::new(&m);
        assert!(c.free_vertices.is_empty());
    }

    #[test]
    fn builtin_curves_have_small_diameter() {
        for g in [Geometry::closed_polygon(4), Geometry::closed_polygon(7), Geometry::ellipse()] {
            let m = make_structured(g, 3, DirichletSpec::None).unwrap();
            let mut diam = 0.0f64;
            for i in 0..m.n_vertices() {
                for j in 0..m.n_vertices() {
                    diam = diam.max(norm(&sub(&m.point(i), &m.point(j))));
                }
            }
            assert!(diam <= 0.5 + 1e-15);
        }
    }

    #[test]
    fn degenerate_cell_rejected() {
        let e = SimplicialMesh::new(2, 2, vec![0.0, 0.0, 1.0, 0.0, 2.0, 0.0], vec![0, 1, 2], vec![]);
        assert!(e.is_err());
    }
}
