//! P1 stiffness and mass assembly and the transmission pencil.
//!
//! Unknowns are ordered as `[u interior, u₀ interior, w boundary]` where
//! `u` solves the equation with the refractive index, `u₀` the free
//! Helmholtz equation and `w` is the shared boundary trace. With that
//! ordering
//!
//! ```text
//! A = | S_II   0     S_IB |      B = | M2_II   0      M2_IB       |
//!     | 0      S_II  S_IB |          | 0       M1_II  M1_IB       |
//!     | S_BI  −S_BI  0    |          | M2_BI  −M1_BI  M2_BB − M1_BB |
//! ```
//!
//! and transmission eigenvalues satisfy `A X = k² B X`.

use crate::geometry::{simplex_signed_measure, DofPartition, Mesh};
use crate::problem::RefractiveIndex;
use crate::sparse::{block_matrix, SparseMatrix};
use crate::{Error, Result};

/// Dense local matrix of a simplex, row-major, (d+1)×(d+1).
pub type LocalMatrix = Vec<Vec<f64>>;

/// Barycentric gradients and measure of a simplex.
fn barycentric_gradients(points: &[[f64; 3]]) -> Result<(Vec<[f64; 3]>, f64)> {
    let dim = points.len() - 1;
    let vol = simplex_signed_measure(dim, points);
    if !(vol > 0.0) {
        return Err(Error::DegenerateElement(0));
    }
    let mut grads = vec![[0.0; 3]; dim + 1];
    if dim == 2 {
        let [x0, y0, _] = points[0];
        let [x1, y1, _] = points[1];
        let [x2, y2, _] = points[2];
        let two_a = 2.0 * vol;
        grads[0] = [(y1 - y2) / two_a, (x2 - x1) / two_a, 0.0];
        grads[1] = [(y2 - y0) / two_a, (x0 - x2) / two_a, 0.0];
        grads[2] = [(y0 - y1) / two_a, (x1 - x0) / two_a, 0.0];
    } else {
        // rows of the inverse Jacobian give the gradients of λ1..λ3
        let e: Vec<[f64; 3]> = (1..4)
            .map(|i| {
                [
                    points[i][0] - points[0][0],
                    points[i][1] - points[0][1],
                    points[i][2] - points[0][2],
                ]
            })
            .collect();
        let det = 6.0 * vol;
        let cross = |a: [f64; 3], b: [f64; 3]| {
            [
                a[1] * b[2] - a[2] * b[1],
                a[2] * b[0] - a[0] * b[2],
                a[0] * b[1] - a[1] * b[0],
            ]
        };
        let g1 = cross(e[1], e[2]);
        let g2 = cross(e[2], e[0]);
        let g3 = cross(e[0], e[1]);
        for (k, g) in [g1, g2, g3].into_iter().enumerate() {
            grads[k + 1] = [g[0] / det, g[1] / det, g[2] / det];
        }
        for d in 0..3 {
            grads[0][d] = -(grads[1][d] + grads[2][d] + grads[3][d]);
        }
    }
    Ok((grads, vol))
}

/// Local P1 stiffness matrix ∫ ∇φ_j · ∇φ_i.
pub fn element_stiffness(points: &[[f64; 3]]) -> Result<LocalMatrix> {
    let (g, vol) = barycentric_gradients(points)?;
    let k = points.len();
    let mut m = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            m[i][j] = vol * (g[i][0] * g[j][0] + g[i][1] * g[j][1] + g[i][2] * g[j][2]);
        }
    }
    Ok(m)
}

/// Mass-matrix weight.
#[derive(Debug, Clone, Copy)]
pub enum Coefficient<'a> {
    Unit,
    Index(&'a RefractiveIndex),
}

/// Barycentric points and weights of the Duffy-collapsed Gauss product rule,
/// exact for cubic integrands, weights summing to `vol`.
fn collapsed_gauss_rule(dim: usize, vol: f64) -> Vec<(Vec<f64>, f64)> {
    let r = (0.6f64).sqrt();
    let gauss = [
        ((1.0 - r) / 2.0, 5.0 / 18.0),
        (0.5, 8.0 / 18.0),
        ((1.0 + r) / 2.0, 5.0 / 18.0),
    ];
    let mut rule = Vec::with_capacity(27);
    for &(u, wu) in &gauss {
        for &(v, wv) in &gauss {
            if dim == 2 {
                let (l1, l2) = (u, v * (1.0 - u));
                rule.push((vec![1.0 - l1 - l2, l1, l2], 2.0 * vol * wu * wv * (1.0 - u)));
            } else {
                for &(t, wt) in &gauss {
                    let (l1, l2, l3) = (u, v * (1.0 - u), t * (1.0 - u) * (1.0 - v));
                    let jac = (1.0 - u).powi(2) * (1.0 - v);
                    rule.push((vec![1.0 - l1 - l2 - l3, l1, l2, l3], 6.0 * vol * wu * wv * wt * jac));
                }
            }
        }
    }
    rule
}

/// Local mass matrix ∫ n φ_j φ_i.
///
/// Unit and constant coefficients use the exact formula
/// `|K|/((d+1)(d+2)) · (1 + δ_ij)`; a variable index uses a collapsed
/// 3-point Gauss–Legendre product rule (9 points on triangles, 27 on tets).
pub fn element_mass(points: &[[f64; 3]], coeff: Coefficient<'_>) -> Result<LocalMatrix> {
    let dim = points.len() - 1;
    let vol = simplex_signed_measure(dim, points);
    if !(vol > 0.0) {
        return Err(Error::DegenerateElement(0));
    }
    let k = dim + 1;
    let denom = ((dim + 1) * (dim + 2)) as f64;
    let exact = |scale: f64| -> LocalMatrix {
        let base = vol / denom;
        (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| {
                        let v = if i == j { 2.0 * base } else { base };
                        if scale == 1.0 {
                            v
                        } else {
                            scale * v
                        }
                    })
                    .collect()
            })
            .collect()
    };
    let index = match coeff {
        Coefficient::Unit => return Ok(exact(1.0)),
        Coefficient::Index(n) => match n.as_constant() {
            Some(c) => return Ok(exact(c)),
            None => n,
        },
    };
    let rule = collapsed_gauss_rule(dim, vol);
    let mut m = vec![vec![0.0; k]; k];
    for (lam, weight) in &rule {
        let mut x = [0.0; 3];
        for (p, &l) in points.iter().zip(lam) {
            for d in 0..3 {
                x[d] += l * p[d];
            }
        }
        let w = weight * index.eval(x)?;
        for i in 0..k {
            for j in 0..k {
                m[i][j] += w * lam[i] * lam[j];
            }
        }
    }
    Ok(m)
}

/// Global (all-vertex) matrices.
#[derive(Debug, Clone)]
pub struct GlobalMatrices {
    pub stiffness: SparseMatrix,
    pub mass: SparseMatrix,
    pub weighted_mass: SparseMatrix,
}

/// Assembles the full stiffness, unit mass and n-weighted mass matrices,
/// visiting cells in `order` (all cells when `None`).
pub fn assemble_global(mesh: &Mesh, n: &RefractiveIndex, order: Option<&[usize]>) -> Result<GlobalMatrices> {
    let nv = mesh.n_vertices();
    let k = mesh.dim() + 1;
    let cap = mesh.n_cells() * k * k;
    let (mut ts, mut tm, mut tw) = (
        Vec::with_capacity(cap),
        Vec::with_capacity(cap),
        Vec::with_capacity(cap),
    );
    let all: Vec<usize>;
    let cells = match order {
        Some(o) => o,
        None => {
            all = (0..mesh.n_cells()).collect();
            &all
        }
    };
    for &c in cells {
        let pts = mesh.cell_points(c);
        let verts = mesh.cell(c);
        let tag = |e: Error| match e {
            Error::DegenerateElement(_) => Error::DegenerateElement(c),
            other => other,
        };
        let s = element_stiffness(&pts).map_err(tag)?;
        let m = element_mass(&pts, Coefficient::Unit).map_err(tag)?;
        let w = element_mass(&pts, Coefficient::Index(n)).map_err(tag)?;
        for i in 0..k {
            for j in 0..k {
                ts.push((verts[i], verts[j], s[i][j]));
                tm.push((verts[i], verts[j], m[i][j]));
                tw.push((verts[i], verts[j], w[i][j]));
            }
        }
    }
    Ok(GlobalMatrices {
        stiffness: SparseMatrix::from_triplets(nv, nv, ts)?,
        mass: SparseMatrix::from_triplets(nv, nv, tm)?,
        weighted_mass: SparseMatrix::from_triplets(nv, nv, tw)?,
    })
}

/// Interior/boundary blocks of the stiffness (S), unit mass (M1) and
/// weighted mass (M2) matrices.
#[derive(Debug, Clone)]
pub struct Blocks {
    pub s_ii: SparseMatrix,
    pub s_ib: SparseMatrix,
    pub s_bi: SparseMatrix,
    pub m1_ii: SparseMatrix,
    pub m1_ib: SparseMatrix,
    pub m1_bi: SparseMatrix,
    pub m1_bb: SparseMatrix,
    pub m2_ii: SparseMatrix,
    pub m2_ib: SparseMatrix,
    pub m2_bi: SparseMatrix,
    pub m2_bb: SparseMatrix,
    pub global: GlobalMatrices,
    pub partition: DofPartition,
    /// Index sampled to be ≡ 1: the pencil is degenerate.
    pub index_is_one: bool,
}

pub fn assemble_blocks(mesh: &Mesh, partition: &DofPartition, n: &RefractiveIndex) -> Result<Blocks> {
    if partition.n_interior() == 0 {
        return Err(Error::EmptyInterior);
    }
    let g = assemble_global(mesh, n, None)?;
    let (i, b) = (&partition.interior, &partition.boundary);
    let index_is_one = n.sample(mesh)?.is_identically_one();
    Ok(Blocks {
        s_ii: g.stiffness.extract(i, i),
        s_ib: g.stiffness.extract(i, b),
        s_bi: g.stiffness.extract(b, i),
        m1_ii: g.mass.extract(i, i),
        m1_ib: g.mass.extract(i, b),
        m1_bi: g.mass.extract(b, i),
        m1_bb: g.mass.extract(b, b),
        m2_ii: g.weighted_mass.extract(i, i),
        m2_ib: g.weighted_mass.extract(i, b),
        m2_bi: g.weighted_mass.extract(b, i),
        m2_bb: g.weighted_mass.extract(b, b),
        global: g,
        partition: partition.clone(),
        index_is_one,
    })
}

/// Which field a pencil unknown belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    /// Interior value of the field with refractive index n.
    UInterior,
    /// Interior value of the free field u₀.
    U0Interior,
    /// Shared boundary trace.
    Boundary,
}

#[derive(Debug, Clone)]
pub struct Pencil {
    pub a: SparseMatrix,
    pub b: SparseMatrix,
    pub partition: DofPartition,
    /// Full-mesh unit mass matrix, used for normalization.
    pub mass: SparseMatrix,
    pub degenerate: bool,
}

impl Pencil {
    pub fn size(&self) -> usize {
        self.a.nrows()
    }

    /// (field, vertex) of pencil unknown `row`.
    pub fn unknown(&self, row: usize) -> (Field, usize) {
        let ni = self.partition.n_interior();
        if row < ni {
            (Field::UInterior, self.partition.interior[row])
        } else if row < 2 * ni {
            (Field::U0Interior, self.partition.interior[row - ni])
        } else {
            (Field::Boundary, self.partition.boundary[row - 2 * ni])
        }
    }

    /// Splits a pencil vector into per-vertex `(u, u₀)` arrays.
    pub fn split_fields<T: Copy + Default>(&self, x: &[T]) -> (Vec<T>, Vec<T>) {
        let nv = self.partition.n_total();
        let ni = self.partition.n_interior();
        let mut u = vec![T::default(); nv];
        let mut u0 = vec![T::default(); nv];
        for (k, &v) in self.partition.interior.iter().enumerate() {
            u[v] = x[k];
            u0[v] = x[ni + k];
        }
        for (k, &v) in self.partition.boundary.iter().enumerate() {
            u[v] = x[2 * ni + k];
            u0[v] = x[2 * ni + k];
        }
        (u, u0)
    }
}

pub fn build_pencil(blocks: &Blocks) -> Result<Pencil> {
    let ni = blocks.s_ii.nrows();
    let nb = blocks.m1_bb.nrows();
    let sizes = [ni, ni, nb];
    let m_bb = blocks.m2_bb.linear_combination(1.0, &blocks.m1_bb, -1.0)?;
    let a = block_matrix(
        &sizes,
        &sizes,
        &[
            vec![Some((&blocks.s_ii, 1.0)), None, Some((&blocks.s_ib, 1.0))],
            vec![None, Some((&blocks.s_ii, 1.0)), Some((&blocks.s_ib, 1.0))],
            vec![Some((&blocks.s_bi, 1.0)), Some((&blocks.s_bi, -1.0)), None],
        ],
    )?;
    let b = block_matrix(
        &sizes,
        &sizes,
        &[
            vec![Some((&blocks.m2_ii, 1.0)), None, Some((&blocks.m2_ib, 1.0))],
            vec![None, Some((&blocks.m1_ii, 1.0)), Some((&blocks.m1_ib, 1.0))],
            vec![
                Some((&blocks.m2_bi, 1.0)),
                Some((&blocks.m1_bi, -1.0)),
                Some((&m_bb, 1.0)),
            ],
        ],
    )?;
    if blocks.index_is_one {
        log::warn!("refractive index is identically 1: the pencil is degenerate");
    }
    Ok(Pencil {
        a,
        b,
        partition: blocks.partition.clone(),
        mass: blocks.global.mass.clone(),
        degenerate: blocks.index_is_one,
    })
}

/// Interior stiffness and unit mass for the Dirichlet Laplacian.
pub fn assemble_dirichlet(mesh: &Mesh, partition: &DofPartition) -> Result<(SparseMatrix, SparseMatrix)> {
    if partition.n_interior() == 0 {
        return Err(Error::EmptyInterior);
    }
    let g = assemble_global(mesh, &RefractiveIndex::constant(1.0), None)?;
    let i = &partition.interior;
    Ok((g.stiffness.extract(i, i), g.mass.extract(i, i)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{builtin_domain, mesh_cube, mesh_domain, partition_dofs};
    use crate::problem::parse_index;

    const UNIT: [[f64; 3]; 3] = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];

    #[test]
    fn unit_triangle_stiffness() {
        let s = element_stiffness(&UNIT).unwrap();
        let expected = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((s[i][j] - expected[i][j]).abs() < 1e-15);
            }
        }
        let scaled: Vec<[f64; 3]> = UNIT.iter().map(|p| [2.0 * p[0], 2.0 * p[1], 0.0]).collect();
        let s2 = element_stiffness(&scaled).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((s2[i][j] - s[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn row_sums_vanish() {
        let tri = [[0.1, 0.2, 0.0], [1.3, -0.4, 0.0], [0.7, 0.9, 0.0]];
        let tet = [[0.0, 0.0, 0.0], [1.0, 0.1, 0.0], [0.2, 1.0, 0.1], [0.1, 0.3, 1.2]];
        for s in [element_stiffness(&tri).unwrap(), element_stiffness(&tet).unwrap()] {
            for row in &s {
                assert!(row.iter().sum::<f64>().abs() < 1e-14);
            }
        }
    }

    #[test]
    fn unit_triangle_mass() {
        let m = element_mass(&UNIT, Coefficient::Unit).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 2.0 / 24.0 } else { 1.0 / 24.0 };
                assert!((m[i][j] - e).abs() < 1e-16);
            }
        }
        let n16 = RefractiveIndex::constant(16.0);
        let m16 = element_mass(&UNIT, Coefficient::Index(&n16)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m16[i][j], 16.0 * m[i][j]);
            }
        }
        let tet = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let mt = element_mass(&tet, Coefficient::Unit).unwrap();
        let total: f64 = mt.iter().flatten().sum();
        assert!((total - 1.0 / 6.0).abs() < 1e-16);
    }

    /// Brute force: split into 64 sub-triangles, 7-point degree-5 rule on each.
    fn subdivided_mass(points: &[[f64; 3]], n: &RefractiveIndex) -> [[f64; 3]; 3] {
        let mut tris = vec![[points[0], points[1], points[2]]];
        for _ in 0..3 {
            let mut next = Vec::new();
            for t in tris {
                let m = |a: [f64; 3], b: [f64; 3]| [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0, 0.0];
                let (m01, m12, m20) = (m(t[0], t[1]), m(t[1], t[2]), m(t[2], t[0]));
                next.extend([[t[0], m01, m20], [m01, t[1], m12], [m20, m12, t[2]], [m01, m12, m20]]);
            }
            tris = next;
        }
        assert_eq!(tris.len(), 64);
        // Dunavant degree-5 rule
        let a1 = 0.059_715_871_789_770;
        let b1 = 0.470_142_064_105_115;
        let a2 = 0.797_426_985_353_087;
        let b2 = 0.101_286_507_323_456;
        let w0 = 0.225;
        let w1 = 0.132_394_152_788_506;
        let w2 = 0.125_939_180_544_827;
        let mut rule = vec![([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], w0)];
        for (a, b, w) in [(a1, b1, w1), (a2, b2, w2)] {
            rule.push(([a, b, b], w));
            rule.push(([b, a, b], w));
            rule.push(([b, b, a], w));
        }
        let area = simplex_signed_measure(2, points);
        let bary_of = |x: [f64; 3]| {
            let l1 = simplex_signed_measure(2, &[points[0], x, points[2]]) / area;
            let l2 = simplex_signed_measure(2, &[points[0], points[1], x]) / area;
            [1.0 - l1 - l2, l1, l2]
        };
        let mut out = [[0.0; 3]; 3];
        for t in tris {
            let sub_area = simplex_signed_measure(2, &t);
            for (lam, w) in &rule {
                let mut x = [0.0; 3];
                for k in 0..3 {
                    for d in 0..2 {
                        x[d] += lam[k] * t[k][d];
                    }
                }
                let phi = bary_of(x);
                let nv = n.eval(x).unwrap();
                for i in 0..3 {
                    for j in 0..3 {
                        out[i][j] += w * sub_area * nv * phi[i] * phi[j];
                    }
                }
            }
        }
        out
    }

    #[test]
    fn variable_mass_matches_subdivision_quadrature() {
        let n = parse_index("16+8*sin(4*x*y)").unwrap();
        let tri = [[0.5, 0.5, 0.0], [0.501, 0.5002, 0.0], [0.5004, 0.5011, 0.0]];
        let m = element_mass(&tri, Coefficient::Index(&n)).unwrap();
        let oracle = subdivided_mass(&tri, &n);
        for i in 0..3 {
            for j in 0..3 {
                let rel = (m[i][j] - oracle[i][j]).abs() / oracle[i][j].abs();
                assert!(rel < 1e-6, "({i},{j}) rel {rel}");
            }
        }
    }

    #[test]
    fn degenerate_element_rejected() {
        let flat = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]];
        assert!(element_stiffness(&flat).is_err());
        assert!(element_mass(&flat, Coefficient::Unit).is_err());
    }

    fn small_mesh() -> Mesh {
        let spec = builtin_domain("equilateral_triangle", &[]).unwrap();
        mesh_domain(&spec, 0.5).unwrap()
    }

    #[test]
    fn global_identities() {
        let mesh = small_mesh();
        let g = assemble_global(&mesh, &RefractiveIndex::constant(16.0), None).unwrap();
        let area = 3f64.sqrt();
        assert!((g.mass.sum_all() - area).abs() < 1e-12);
        assert!((g.weighted_mass.sum_all() - 16.0 * area).abs() < 1e-11);
        let ones = vec![1.0; mesh.n_vertices()];
        assert!(g.stiffness.mul_vec(&ones).iter().all(|v| v.abs() < 1e-12));
        assert!(g.stiffness.is_symmetric());
        assert!(g.mass.is_symmetric());
    }

    #[test]
    fn assembly_is_order_independent() {
        let mesh = small_mesh();
        let n = parse_index("16+8*sin(4*x*y)").unwrap();
        let fwd = assemble_global(&mesh, &n, None).unwrap();
        let rev: Vec<usize> = (0..mesh.n_cells()).rev().collect();
        let bwd = assemble_global(&mesh, &n, Some(&rev)).unwrap();
        for (m1, m2) in [
            (&fwd.stiffness, &bwd.stiffness),
            (&fwd.weighted_mass, &bwd.weighted_mass),
        ] {
            assert_eq!(m1.nnz(), m2.nnz());
            for ((r, c, a), (_, _, b)) in m1.triplets().into_iter().zip(m2.triplets()) {
                let _ = (r, c);
                assert!((a - b).abs() <= 1e-13 * a.abs().max(1e-300) + 1e-300);
            }
        }
    }

    #[test]
    fn block_dimensions_and_transposes() {
        let mesh = small_mesh();
        let p = partition_dofs(&mesh);
        let (ni, nb) = (p.n_interior(), p.n_boundary());
        let b = assemble_blocks(&mesh, &p, &RefractiveIndex::constant(16.0)).unwrap();
        assert_eq!((b.s_ii.nrows(), b.s_ii.ncols()), (ni, ni));
        assert_eq!((b.s_ib.nrows(), b.s_ib.ncols()), (ni, nb));
        assert_eq!((b.s_bi.nrows(), b.s_bi.ncols()), (nb, ni));
        assert_eq!((b.m2_bb.nrows(), b.m2_bb.ncols()), (nb, nb));
        assert_eq!(b.s_bi, b.s_ib.transpose());
        assert_eq!(b.m1_bi, b.m1_ib.transpose());
        assert_eq!(b.m2_bi, b.m2_ib.transpose());
        let pencil = build_pencil(&b).unwrap();
        assert_eq!(pencil.size(), 2 * ni + nb);
        assert!(!pencil.degenerate);
        // zero blocks of A
        for r in 0..ni {
            for (c, _) in pencil.a.row(r) {
                assert!(!(ni..2 * ni).contains(&c));
            }
        }
        for r in 2 * ni..2 * ni + nb {
            for (c, _) in pencil.a.row(r) {
                assert!(c < 2 * ni);
            }
        }
        let s_nnz = b.s_ii.nnz() + b.s_ib.nnz() + b.s_bi.nnz();
        assert!(pencil.a.nnz() <= 3 * s_nnz);
        // exact block placement
        assert_eq!(pencil.a.get(ni, ni), b.s_ii.get(0, 0));
        assert_eq!(pencil.b.get(0, 0), b.m2_ii.get(0, 0));
        assert_eq!(pencil.b.get(ni, ni), b.m1_ii.get(0, 0));
        assert_eq!(pencil.b.get(2 * ni, 2 * ni), b.m2_bb.get(0, 0) - b.m1_bb.get(0, 0));
    }

    #[test]
    fn unit_index_gives_degenerate_pencil() {
        let mesh = small_mesh();
        let p = partition_dofs(&mesh);
        let b = assemble_blocks(&mesh, &p, &RefractiveIndex::constant(1.0)).unwrap();
        let pencil = build_pencil(&b).unwrap();
        assert!(pencil.degenerate);
        let ni = p.n_interior();
        for r in 2 * ni..pencil.size() {
            for (c, v) in pencil.b.row(r) {
                if c >= 2 * ni {
                    assert_eq!(v, 0.0);
                }
            }
        }
    }

    #[test]
    fn empty_interior_rejected() {
        let mesh = Mesh::new(2, UNIT.to_vec(), vec![0, 1, 2], vec![vec![0]; 3]).unwrap();
        let p = partition_dofs(&mesh);
        assert!(matches!(
            assemble_blocks(&mesh, &p, &RefractiveIndex::constant(16.0)),
            Err(Error::EmptyInterior)
        ));
        assert!(matches!(assemble_dirichlet(&mesh, &p), Err(Error::EmptyInterior)));
    }

    #[test]
    fn cube_mass_partition_of_unity() {
        let mesh = mesh_cube(0.25).unwrap();
        let g = assemble_global(&mesh, &RefractiveIndex::constant(16.0), None).unwrap();
        assert!((g.mass.sum_all() - 1.0).abs() < 1e-12);
        assert!((g.weighted_mass.sum_all() - 16.0).abs() < 1e-11);
        let ones = vec![1.0; mesh.n_vertices()];
        assert!(g.stiffness.mul_vec(&ones).iter().all(|v| v.abs() < 1e-12));
        let (s, m) = assemble_dirichlet(&mesh, &partition_dofs(&mesh)).unwrap();
        assert!(s.is_symmetric() && m.is_symmetric());
    }
}
