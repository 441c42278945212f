use super::SimplicialMesh;

/// Counting data consumed by the preconditioner formulas.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshCombinatorics {
    pub dim: usize,
    pub n_vertices: usize,
    pub n_cells: usize,
    /// Cell connectivity, stride `dim + 1`.
    pub cells: Vec<usize>,
    /// N⁰: vertices not on γ, ascending.
    pub free_vertices: Vec<usize>,
    /// Position of a vertex in `free_vertices`.
    pub free_index: Vec<Option<usize>>,
    /// d_{T,ν}: number of cells containing ν.
    pub valence: Vec<usize>,
    pub volume: Vec<f64>,
    /// |T|^{1/d}.
    pub h: Vec<f64>,
    /// |ω(ν)|.
    pub patch_volume: Vec<f64>,
    /// Cells containing each vertex, ascending.
    pub vertex_cells: Vec<Vec<usize>>,
    /// Largest ratio of lengths of neighbouring cells (d = 1 only).
    pub kmesh_ratio: Option<f64>,
}

impl MeshCombinatorics {
    pub fn new(mesh: &SimplicialMesh) -> Self {
        let d = mesh.dim();
        let nv = mesh.n_vertices();
        let nc = mesh.n_cells();
        let on_gamma = mesh.dirichlet_vertices();
        let mut free_index = vec![None; nv];
        let mut free_vertices = Vec::new();
        for v in 0..nv {
            if !on_gamma[v] {
                free_index[v] = Some(free_vertices.len());
                free_vertices.push(v);
            }
        }
        let volume: Vec<f64> = (0..nc).map(|c| mesh.volume(c)).collect();
        let h = volume.iter().map(|v| v.powf(1.0 / d as f64)).collect();
        let mut valence = vec![0usize; nv];
        let mut patch_volume = vec![0.0; nv];
        let mut vertex_cells = vec![Vec::new(); nv];
        for c in 0..nc {
            for &v in mesh.cell(c) {
                valence[v] += 1;
                patch_volume[v] += volume[c];
                vertex_cells[v].push(c);
            }
        }
        let kmesh_ratio = (d == 1).then(|| {
            let mut r = 1.0f64;
            for cs in &vertex_cells {
                for &a in cs {
                    for &b in cs {
                        r = r.max(volume[a] / volume[b]);
                    }
                }
            }
            r
        });
        MeshCombinatorics {
            dim: d,
            n_vertices: nv,
            n_cells: nc,
            cells: mesh.cells().to_vec(),
            free_vertices,
            free_index,
            valence,
            volume,
            h,
            patch_volume,
            vertex_cells,
            kmesh_ratio,
        }
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        &self.cells[c * (self.dim + 1)..(c + 1) * (self.dim + 1)]
    }

    /// N⁰_{T,T}: free vertices of cell `c`.
    pub fn free_vertices_of(&self, c: usize) -> impl Iterator<Item = usize> + '_ {
        self.cell(c).iter().copied().filter(|&v| self.free_index[v].is_some())
    }

    /// Cells sharing at least one vertex with `c` (including `c`), ascending.
    pub fn neighbors(&self, c: usize) -> Vec<usize> {
        let mut n: Vec<usize> = self.cell(c).iter().flat_map(|&v| self.vertex_cells[v].iter().copied()).collect();
        n.sort_unstable();
        n.dedup();
        n
    }

    /// Vertices sharing a cell with `v` (including `v`), ascending.
    pub fn vertex_neighbors(&self, v: usize) -> Vec<usize> {
        let mut n: Vec<usize> =
            self.vertex_cells[v].iter().flat_map(|&c| self.cell(c).iter().copied()).collect();
        n.sort_unstable();
        n.dedup();
        n
    }

    /// |ω(ν) ∩ ω(ν')|.
    pub fn patch_overlap(&self, a: usize, b: usize) -> f64 {
        let cb = &self.vertex_cells[b];
        self.vertex_cells[a].iter().filter(|c| cb.binary_search(c).is_ok()).map(|&c| self.volume[c]).sum()
    }

    /// Whether cell `c` has a vertex on γ.
    pub fn touches_gamma(&self, c: usize) -> bool {
        self.cell(c).iter().any(|&v| self.free_index[v].is_none())
    }

    pub fn h_min(&self) -> f64 {
        self.h.iter().copied().fold(f64::INFINITY, f64::min)
    }
}
