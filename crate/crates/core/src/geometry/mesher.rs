use std::collections::{HashMap, HashSet};

use spade::{AngleLimit, ConstrainedDelaunayTriangulation, Point2 as SpadePoint, RefinementParameters, Triangulation};

use super::domain::DomainSpec2D;
use super::mesh::{simplex_signed_measure, triangle_angles, Mesh};
use crate::{Error, Result};

/// Smallest admissible triangle angle unless an input corner is sharper.
pub const MIN_ANGLE_DEG: f64 = 15.0;
const SMOOTHING_PASSES: usize = 3;

/// Triangulates a 2D domain with target edge length `h`.
///
/// The boundary is split into pieces of length at most `h` (arcs uniformly
/// in angle, nodes exactly on the circle), the polygon is triangulated by a
/// constrained Delaunay refinement that never splits boundary edges, interior
/// nodes get three Laplacian smoothing passes and a final round of Delaunay
/// edge flips restores angle quality.
pub fn mesh_domain(spec: &DomainSpec2D, h: f64) -> Result<Mesh> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidParameter(format!("h = {h}")));
    }

    // boundary polyline; corner nodes carry the tags of both segments
    let mut nodes: Vec<[f64; 2]> = Vec::new();
    let mut node_tags: Vec<Vec<usize>> = Vec::new();
    let mut loop_nodes: Vec<Vec<usize>> = Vec::new();
    let mut seg_index = 0;
    for lp in &spec.loops {
        let mut ids = Vec::new();
        let first_seg = seg_index;
        for seg in lp {
            let pieces = (seg.length() / h - 1e-9).ceil() as usize;
            if pieces < 2 {
                return Err(Error::MeshTooCoarse {
                    h,
                    reason: format!(
                        "segment {seg_index} of length {:.4} gets fewer than 2 subdivisions",
                        seg.length()
                    ),
                });
            }
            for i in 0..pieces {
                let p = seg.point_at(i as f64 / pieces as f64);
                let mut t = vec![seg_index];
                if i == 0 {
                    let prev = if seg_index == first_seg {
                        first_seg + lp.len() - 1
                    } else {
                        seg_index - 1
                    };
                    t.push(prev);
                }
                nodes.push(p);
                node_tags.push(t);
                ids.push(nodes.len() - 1);
            }
            seg_index += 1;
        }
        loop_nodes.push(ids);
    }

    let mut cdt: ConstrainedDelaunayTriangulation<SpadePoint<f64>> = ConstrainedDelaunayTriangulation::new();
    let mut handles = Vec::with_capacity(nodes.len());
    for p in &nodes {
        let hnd = cdt.insert(SpadePoint::new(p[0], p[1])).map_err(|e| Error::Meshing {
            x: p[0],
            y: p[1],
            reason: format!("{e:?}"),
        })?;
        handles.push(hnd);
    }
    if cdt.num_vertices() != nodes.len() {
        return Err(Error::Meshing {
            x: nodes[0][0],
            y: nodes[0][1],
            reason: "duplicate boundary nodes".into(),
        });
    }
    for ids in &loop_nodes {
        for i in 0..ids.len() {
            let a = handles[ids[i]];
            let b = handles[ids[(i + 1) % ids.len()]];
            if cdt.can_add_constraint(a, b) {
                cdt.add_constraint(a, b);
            } else {
                let p = nodes[ids[i]];
                return Err(Error::Meshing {
                    x: p[0],
                    y: p[1],
                    reason: "boundary self-intersects".into(),
                });
            }
        }
    }

    let max_area = 1.2 * 3f64.sqrt() / 4.0 * h * h;
    let budget = (20.0 * spec.area() / max_area) as usize + 10 * nodes.len() + 100;
    let result = cdt.refine(
        RefinementParameters::<f64>::new()
            .exclude_outer_faces(true)
            .keep_constraint_edges()
            .with_max_allowed_area(max_area)
            .with_angle_limit(AngleLimit::from_deg(25.0))
            .with_max_additional_vertices(budget),
    );
    if !result.refinement_complete {
        log::warn!("mesh refinement hit its vertex budget ({budget})");
    }
    let excluded: HashSet<_> = result.excluded_faces.into_iter().collect();

    // collect the inner faces and compact vertex numbering
    let mut remap: HashMap<usize, usize> = HashMap::new();
    let mut points: Vec<[f64; 3]> = Vec::new();
    let mut tags: Vec<Vec<usize>> = Vec::new();
    let boundary_of_handle: HashMap<usize, usize> = handles.iter().enumerate().map(|(i, h)| (h.index(), i)).collect();
    let mut cells = Vec::new();
    for face in cdt.inner_faces() {
        if excluded.contains(&face.fix()) {
            continue;
        }
        for v in face.vertices() {
            let key = v.fix().index();
            let id = *remap.entry(key).or_insert_with(|| {
                let pos = v.position();
                points.push([pos.x, pos.y, 0.0]);
                tags.push(
                    boundary_of_handle
                        .get(&key)
                        .map(|&n| node_tags[n].clone())
                        .unwrap_or_default(),
                );
                points.len() - 1
            });
            cells.push(id);
        }
    }
    if cells.is_empty() {
        return Err(Error::Meshing {
            x: nodes[0][0],
            y: nodes[0][1],
            reason: "no interior triangles".into(),
        });
    }
    for c in cells.chunks_exact_mut(3) {
        let p = [points[c[0]], points[c[1]], points[c[2]]];
        if simplex_signed_measure(2, &p) < 0.0 {
            c.swap(1, 2);
        }
    }

    let fixed: Vec<bool> = tags.iter().map(|t| !t.is_empty()).collect();
    smooth(&mut points, &cells, &fixed, SMOOTHING_PASSES);
    delaunay_flips(&points, &mut cells);

    let mesh = Mesh::new(2, points, cells, tags)?;
    check_quality(spec, &mesh, h)?;
    Ok(mesh)
}

fn check_quality(spec: &DomainSpec2D, mesh: &Mesh, h: f64) -> Result<()> {
    let sharpest = spec
        .corners
        .iter()
        .map(|c| c.angle.to_degrees())
        .fold(f64::MAX, f64::min);
    // inside a wedge sharper than the floor the neighbouring triangles are
    // squeezed too; allow them down to 3/4 of the corner angle
    let floor = if sharpest < 2.0 * MIN_ANGLE_DEG {
        MIN_ANGLE_DEG.min(0.75 * sharpest)
    } else {
        MIN_ANGLE_DEG
    } - 1e-6;
    for c in 0..mesh.n_cells() {
        let pts = mesh.cell_points(c);
        let worst = triangle_angles(&pts).into_iter().fold(f64::MAX, f64::min).to_degrees();
        if worst < floor {
            let cx = (pts[0][0] + pts[1][0] + pts[2][0]) / 3.0;
            let cy = (pts[0][1] + pts[1][1] + pts[2][1]) / 3.0;
            return Err(Error::Meshing {
                x: cx,
                y: cy,
                reason: format!("triangle angle {worst:.2}° below floor {floor:.2}°"),
            });
        }
    }
    let topo = mesh.topological_boundary();
    for v in 0..mesh.n_vertices() {
        if topo[v] != mesh.is_boundary(v) {
            let p = mesh.point(v);
            return Err(Error::Meshing {
                x: p[0],
                y: p[1],
                reason: "boundary classification mismatch".into(),
            });
        }
    }
    let longest = mesh.max_edge();
    if longest > 2.0 * h {
        return Err(Error::MeshTooCoarse {
            h,
            reason: format!("longest edge {longest:.4} exceeds 2h"),
        });
    }
    Ok(())
}

fn neighbours(n: usize, cells: &[usize]) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let mut nb = vec![Vec::new(); n];
    let mut incident = vec![Vec::new(); n];
    for (c, t) in cells.chunks_exact(3).enumerate() {
        for i in 0..3 {
            incident[t[i]].push(c);
            for j in 0..3 {
                if i != j && !nb[t[i]].contains(&t[j]) {
                    nb[t[i]].push(t[j]);
                }
            }
        }
    }
    (nb, incident)
}

fn min_angle_of(points: &[[f64; 3]], cells: &[usize], list: &[usize]) -> f64 {
    list.iter()
        .map(|&c| {
            let t = &cells[3 * c..3 * c + 3];
            let p = [points[t[0]], points[t[1]], points[t[2]]];
            if simplex_signed_measure(2, &p) <= 0.0 {
                return -1.0;
            }
            triangle_angles(&p).into_iter().fold(f64::MAX, f64::min)
        })
        .fold(f64::MAX, f64::min)
}

/// Gauss–Seidel Laplacian smoothing of free vertices. A move is kept only if
/// it does not lower the smallest angle of the incident triangles.
fn smooth(points: &mut [[f64; 3]], cells: &[usize], fixed: &[bool], passes: usize) {
    let (nb, incident) = neighbours(points.len(), cells);
    for _ in 0..passes {
        for v in 0..points.len() {
            if fixed[v] || nb[v].is_empty() {
                continue;
            }
            let k = nb[v].len() as f64;
            let mut target = [0.0; 3];
            for &w in &nb[v] {
                target[0] += points[w][0] / k;
                target[1] += points[w][1] / k;
            }
            let before = min_angle_of(points, cells, &incident[v]);
            let old = points[v];
            points[v] = target;
            if min_angle_of(points, cells, &incident[v]) < before {
                points[v] = old;
            }
        }
    }
}

/// Lawson flips of interior edges until every edge is locally Delaunay.
fn delaunay_flips(points: &[[f64; 3]], cells: &mut [usize]) {
    for _ in 0..100 {
        let mut edge_map: HashMap<(usize, usize), Vec<(usize, usize)>> = HashMap::new();
        for (c, t) in cells.chunks_exact(3).enumerate() {
            for i in 0..3 {
                let (a, b) = (t[(i + 1) % 3], t[(i + 2) % 3]);
                edge_map.entry((a.min(b), a.max(b))).or_default().push((c, i));
            }
        }
        let mut touched = vec![false; cells.len() / 3];
        let mut flips = 0;
        let mut keys: Vec<_> = edge_map.keys().copied().collect();
        keys.sort_unstable();
        for key in keys {
            let owners = &edge_map[&key];
            if owners.len() != 2 {
                continue;
            }
            let (c1, i1) = owners[0];
            let (c2, i2) = owners[1];
            if touched[c1] || touched[c2] {
                continue;
            }
            let t1 = [cells[3 * c1], cells[3 * c1 + 1], cells[3 * c1 + 2]];
            let t2 = [cells[3 * c2], cells[3 * c2 + 1], cells[3 * c2 + 2]];
            let a1 = triangle_angles(&[points[t1[0]], points[t1[1]], points[t1[2]]])[i1];
            let a2 = triangle_angles(&[points[t2[0]], points[t2[1]], points[t2[2]]])[i2];
            if a1 + a2 <= std::f64::consts::PI + 1e-10 {
                continue;
            }
            // t1 = (p, a, b) with p opposite the shared edge
            let p = t1[i1];
            let a = t1[(i1 + 1) % 3];
            let b = t1[(i1 + 2) % 3];
            let q = t2[i2];
            let n1 = [p, a, q];
            let n2 = [p, q, b];
            let ok = [n1, n2]
                .iter()
                .all(|t| simplex_signed_measure(2, &[points[t[0]], points[t[1]], points[t[2]]]) > 0.0);
            if !ok {
                continue;
            }
            cells[3 * c1..3 * c1 + 3].copy_from_slice(&n1);
            cells[3 * c2..3 * c2 + 3].copy_from_slice(&n2);
            touched[c1] = true;
            touched[c2] = true;
            flips += 1;
        }
        if flips == 0 {
            return;
        }
    }
}
