use std::collections::HashMap;

use super::domain::DomainSpec2D;
use crate::{Error, Result};

/// Simplicial mesh in 2D (triangles) or 3D (tetrahedra).
///
/// Points are stored with three coordinates; 2D meshes keep `z = 0`.
/// Cells are stored flat with stride `dim + 1` and are positively oriented.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    dim: usize,
    points: Vec<[f64; 3]>,
    cells: Vec<usize>,
    boundary: Vec<bool>,
    /// Boundary segments (2D) or cube faces (3D) each boundary vertex lies on.
    tags: Vec<Vec<usize>>,
}

impl Mesh {
    /// Assembles a mesh and checks orientation and index ranges.
    pub fn new(dim: usize, points: Vec<[f64; 3]>, cells: Vec<usize>, tags: Vec<Vec<usize>>) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidParameter(format!("dimension {dim}")));
        }
        if !cells.len().is_multiple_of(dim + 1) || tags.len() != points.len() {
            return Err(Error::DimensionMismatch("mesh arrays".into()));
        }
        if cells.iter().any(|&v| v >= points.len()) {
            return Err(Error::InvalidParameter("cell vertex out of range".into()));
        }
        let boundary = tags.iter().map(|t| !t.is_empty()).collect();
        let mesh = Mesh {
            dim,
            points,
            cells,
            boundary,
            tags,
        };
        for c in 0..mesh.n_cells() {
            if mesh.signed_measure(c) <= 0.0 {
                return Err(Error::DegenerateElement(c));
            }
        }
        Ok(mesh)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_vertices(&self) -> usize {
        self.points.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len() / (self.dim + 1)
    }

    pub fn point(&self, i: usize) -> [f64; 3] {
        self.points[i]
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        let k = self.dim + 1;
        &self.cells[c * k..(c + 1) * k]
    }

    pub fn cells(&self) -> impl Iterator<Item = &[usize]> {
        self.cells.chunks_exact(self.dim + 1)
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn tags(&self, v: usize) -> &[usize] {
        &self.tags[v]
    }

    pub fn cell_points(&self, c: usize) -> Vec<[f64; 3]> {
        self.cell(c).iter().map(|&v| self.points[v]).collect()
    }

    /// Signed area (2D) or volume (3D) of a cell.
    pub fn signed_measure(&self, c: usize) -> f64 {
        simplex_signed_measure(self.dim, &self.cell_points(c))
    }

    pub fn total_measure(&self) -> f64 {
        (0..self.n_cells()).map(|c| self.signed_measure(c)).sum()
    }

    /// Unique undirected edges as sorted vertex pairs.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<(usize, usize)> = Vec::new();
        let k = self.dim + 1;
        for cell in self.cells() {
            for i in 0..k {
                for j in i + 1..k {
                    let (a, b) = (cell[i].min(cell[j]), cell[i].max(cell[j]));
                    e.push((a, b));
                }
            }
        }
        e.sort_unstable();
        e.dedup();
        e
    }

    /// Cells sharing a facet with each cell (`None` on the boundary), in the
    /// order of the facet opposite local vertex `i`.
    pub fn adjacency(&self) -> Vec<Vec<Option<usize>>> {
        let k = self.dim + 1;
        let mut facet_owner: HashMap<Vec<usize>, (usize, usize)> = HashMap::new();
        let mut adj = vec![vec![None; k]; self.n_cells()];
        for (c, cell) in self.cells().enumerate() {
            for i in 0..k {
                let mut f: Vec<usize> = (0..k).filter(|&j| j != i).map(|j| cell[j]).collect();
                f.sort_unstable();
                if let Some((oc, oi)) = facet_owner.remove(&f) {
                    adj[c][i] = Some(oc);
                    adj[oc][oi] = Some(c);
                } else {
                    facet_owner.insert(f, (c, i));
                }
            }
        }
        adj
    }

    /// Longest edge length.
    pub fn max_edge(&self) -> f64 {
        self.edges()
            .iter()
            .map(|&(a, b)| dist3(self.points[a], self.points[b]))
            .fold(0.0, f64::max)
    }

    /// Smallest interior angle over all triangles, in degrees (2D only).
    pub fn min_angle_deg(&self) -> f64 {
        assert_eq!(self.dim, 2);
        (0..self.n_cells())
            .map(|c| {
                triangle_angles(&self.cell_points(c))
                    .into_iter()
                    .fold(f64::MAX, f64::min)
            })
            .fold(f64::MAX, f64::min)
            .to_degrees()
    }

    /// Average edge length of the cells touching vertex `v`.
    pub fn local_size(&self, v: usize) -> f64 {
        let mut sum = 0.0;
        let mut n = 0;
        for cell in self.cells().filter(|c| c.contains(&v)) {
            for &w in cell {
                if w != v {
                    sum += dist3(self.points[v], self.points[w]);
                    n += 1;
                }
            }
        }
        if n == 0 {
            0.0
        } else {
            sum / n as f64
        }
    }

    /// Index of the vertex closest to `p`.
    pub fn nearest_vertex(&self, p: [f64; 3]) -> usize {
        let mut best = (f64::MAX, 0);
        for (i, q) in self.points.iter().enumerate() {
            let d = dist3(*q, p);
            if d < best.0 {
                best = (d, i);
            }
        }
        best.1
    }

    /// Vertices lying on a facet used by exactly one cell.
    pub fn topological_boundary(&self) -> Vec<bool> {
        let adj = self.adjacency();
        let k = self.dim + 1;
        let mut on = vec![false; self.n_vertices()];
        for (c, cell) in self.cells().enumerate() {
            for i in 0..k {
                if adj[c][i].is_none() {
                    for j in (0..k).filter(|&j| j != i) {
                        on[cell[j]] = true;
                    }
                }
            }
        }
        on
    }
}

pub(crate) fn dist3(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

pub(crate) fn simplex_signed_measure(dim: usize, p: &[[f64; 3]]) -> f64 {
    if dim == 2 {
        0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]))
    } else {
        let a = sub(p[1], p[0]);
        let b = sub(p[2], p[0]);
        let c = sub(p[3], p[0]);
        (a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0]))
            / 6.0
    }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn triangle_angles(p: &[[f64; 3]]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for i in 0..3 {
        let a = sub(p[(i + 1) % 3], p[i]);
        let b = sub(p[(i + 2) % 3], p[i]);
        let cross = a[0] * b[1] - a[1] * b[0];
        let dot = a[0] * b[0] + a[1] * b[1];
        out[i] = cross.abs().atan2(dot);
    }
    out
}

/// Splits every triangle into four through its edge midpoints. Midpoints of
/// boundary edges are moved onto the owning boundary curve.
pub fn refine_uniform(mesh: &Mesh, spec: &DomainSpec2D) -> Result<Mesh> {
    if mesh.dim() != 2 {
        return Err(Error::InvalidParameter(
            "uniform refinement is implemented for triangle meshes".into(),
        ));
    }
    let adj = mesh.adjacency();
    let mut boundary_edges: HashMap<(usize, usize), ()> = HashMap::new();
    for (c, cell) in mesh.cells().enumerate() {
        for i in 0..3 {
            if adj[c][i].is_none() {
                let (a, b) = (cell[(i + 1) % 3], cell[(i + 2) % 3]);
                boundary_edges.insert((a.min(b), a.max(b)), ());
            }
        }
    }

    let mut points = mesh.points.clone();
    let mut tags = mesh.tags.clone();
    let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
    let mut cells = Vec::with_capacity(mesh.cells.len() * 4);

    for cell in mesh.cells() {
        let mut mids = [0usize; 3];
        for i in 0..3 {
            let (a, b) = (cell[i], cell[(i + 1) % 3]);
            let key = (a.min(b), a.max(b));
            mids[i] = *midpoint.entry(key).or_insert_with(|| {
                let pa = points[key.0];
                let pb = points[key.1];
                let mut m = [(pa[0] + pb[0]) / 2.0, (pa[1] + pb[1]) / 2.0, 0.0];
                let mut tag = Vec::new();
                if boundary_edges.contains_key(&key) {
                    let shared = tags[key.0].iter().find(|s| tags[key.1].contains(s)).copied();
                    let seg = shared.unwrap_or_else(|| {
                        // fall back to the nearest segment
                        (0..spec.num_segments())
                            .min_by(|&x, &y| {
                                let dx = spec.segment(x).distance([m[0], m[1]]);
                                let dy = spec.segment(y).distance([m[0], m[1]]);
                                dx.total_cmp(&dy)
                            })
                            .unwrap()
                    });
                    let q = spec.segment(seg).snap([m[0], m[1]]);
                    m = [q[0], q[1], 0.0];
                    tag.push(seg);
                }
                points.push(m);
                tags.push(tag);
                points.len() - 1
            });
        }
        let [m01, m12, m20] = mids;
        let (v0, v1, v2) = (cell[0], cell[1], cell[2]);
        cells.extend_from_slice(&[v0, m01, m20]);
        cells.extend_from_slice(&[m01, v1, m12]);
        cells.extend_from_slice(&[m20, m12, v2]);
        cells.extend_from_slice(&[m01, m12, m20]);
    }
    Mesh::new(2, points, cells, tags)
}

/// Structured tetrahedral mesh of the cube [−½, ½]³ with six tetrahedra per
/// cell (all sharing the cell's main diagonal, so neighbouring cells match).
///
/// Boundary tags are the face ids 0..6 ordered −x, +x, −y, +y, −z, +z.
pub fn mesh_cube(h: f64) -> Result<Mesh> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("h = {h}")));
    }
    let m = (1.0 / h).round() as usize;
    if m < 2 {
        return Err(Error::MeshTooCoarse {
            h,
            reason: "cube needs at least 2 cells per axis".into(),
        });
    }
    let np = m + 1;
    let idx = |i: usize, j: usize, k: usize| i + np * (j + np * k);
    let mut points = Vec::with_capacity(np * np * np);
    let mut tags = Vec::with_capacity(np * np * np);
    for k in 0..np {
        for j in 0..np {
            for i in 0..np {
                let c = |t: usize| t as f64 / m as f64 - 0.5;
                points.push([c(i), c(j), c(k)]);
                let mut t = Vec::new();
                for (axis, v) in [i, j, k].into_iter().enumerate() {
                    if v == 0 {
                        t.push(2 * axis);
                    } else if v == m {
                        t.push(2 * axis + 1);
                    }
                }
                tags.push(t);
            }
        }
    }
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut cells = Vec::with_capacity(m * m * m * 24);
    for k in 0..m {
        for j in 0..m {
            for i in 0..m {
                for perm in PERMS {
                    let mut off = [0usize; 3];
                    let mut tet = [idx(i, j, k); 4];
                    for (s, &axis) in perm.iter().enumerate() {
                        off[axis] = 1;
                        tet[s + 1] = idx(i + off[0], j + off[1], k + off[2]);
                    }
                    let p: Vec<_> = tet.iter().map(|&v| points[v]).collect();
                    if simplex_signed_measure(3, &p) < 0.0 {
                        tet.swap(2, 3);
                    }
                    cells.extend_from_slice(&tet);
                }
            }
        }
    }
    Mesh::new(3, points, cells, tags)
}

/// Interior/boundary split of the vertex set, each class in ascending order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofPartition {
    pub interior: Vec<usize>,
    pub boundary: Vec<usize>,
    /// For every vertex: (is_boundary, position within its class).
    pub position: Vec<(bool, usize)>,
}

impl DofPartition {
    pub fn n_interior(&self) -> usize {
        self.interior.len()
    }

    pub fn n_boundary(&self) -> usize {
        self.boundary.len()
    }

    pub fn n_total(&self) -> usize {
        self.interior.len() + self.boundary.len()
    }
}

pub fn partition_dofs(mesh: &Mesh) -> DofPartition {
    let mut interior = Vec::new();
    let mut boundary = Vec::new();
    let mut position = Vec::with_capacity(mesh.n_vertices());
    for v in 0..mesh.n_vertices() {
        if mesh.is_boundary(v) {
            position.push((true, boundary.len()));
            boundary.push(v);
        } else {
            position.push((false, interior.len()));
            interior.push(v);
        }
    }
    DofPartition {
        interior,
        boundary,
        position,
    }
}
