use std::f64::consts::PI;

use crate::{Error, Result};

pub type Point2 = [f64; 2];

const CLOSE_TOL: f64 = 1e-12;

/// One piece of a boundary loop. Loops run counter-clockwise around the
/// domain, so the domain lies to the left of every segment.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundarySegment {
    Line {
        start: Point2,
        end: Point2,
    },
    /// Circular arc from `start` to `end` around `center`; `ccw` gives the
    /// direction of travel on the circle.
    Arc {
        start: Point2,
        end: Point2,
        center: Point2,
        radius: f64,
        ccw: bool,
    },
}

impl BoundarySegment {
    pub fn line(start: Point2, end: Point2) -> Self {
        BoundarySegment::Line { start, end }
    }

    pub fn arc(start: Point2, end: Point2, center: Point2, ccw: bool) -> Result<Self> {
        let radius = dist(start, center);
        let r_end = dist(end, center);
        if radius <= 0.0 || ((r_end - radius) / radius).abs() > CLOSE_TOL {
            return Err(Error::InvalidParameter(format!(
                "arc endpoints {start:?}, {end:?} are not on a common circle about {center:?}"
            )));
        }
        Ok(BoundarySegment::Arc {
            start,
            end,
            center,
            radius,
            ccw,
        })
    }

    pub fn start(&self) -> Point2 {
        match *self {
            BoundarySegment::Line { start, .. } | BoundarySegment::Arc { start, .. } => start,
        }
    }

    pub fn end(&self) -> Point2 {
        match *self {
            BoundarySegment::Line { end, .. } | BoundarySegment::Arc { end, .. } => end,
        }
    }

    pub fn is_arc(&self) -> bool {
        matches!(self, BoundarySegment::Arc { .. })
    }

    /// Start angle and signed sweep of an arc (positive when counter-clockwise).
    fn arc_angles(&self) -> Option<(f64, f64)> {
        match *self {
            BoundarySegment::Arc {
                start,
                end,
                center,
                ccw,
                ..
            } => {
                let a0 = (start[1] - center[1]).atan2(start[0] - center[0]);
                let a1 = (end[1] - center[1]).atan2(end[0] - center[0]);
                let mut sweep = (a1 - a0).rem_euclid(2.0 * PI);
                if sweep == 0.0 {
                    sweep = 2.0 * PI;
                }
                if !ccw {
                    sweep -= 2.0 * PI;
                }
                Some((a0, sweep))
            }
            BoundarySegment::Line { .. } => None,
        }
    }

    pub fn length(&self) -> f64 {
        match *self {
            BoundarySegment::Line { start, end } => dist(start, end),
            BoundarySegment::Arc { radius, .. } => {
                let (_, sweep) = self.arc_angles().unwrap();
                radius * sweep.abs()
            }
        }
    }

    /// Point at parameter `t` in [0, 1] (arc length proportional).
    pub fn point_at(&self, t: f64) -> Point2 {
        if t <= 0.0 {
            return self.start();
        }
        if t >= 1.0 {
            return self.end();
        }
        match *self {
            BoundarySegment::Line { start, end } => {
                [start[0] + t * (end[0] - start[0]), start[1] + t * (end[1] - start[1])]
            }
            BoundarySegment::Arc { center, radius, .. } => {
                let (a0, sweep) = self.arc_angles().unwrap();
                let a = a0 + t * sweep;
                [center[0] + radius * a.cos(), center[1] + radius * a.sin()]
            }
        }
    }

    /// Unit tangent (direction of travel) at parameter `t`.
    pub fn tangent_at(&self, t: f64) -> Point2 {
        match *self {
            BoundarySegment::Line { start, end } => {
                let l = dist(start, end);
                [(end[0] - start[0]) / l, (end[1] - start[1]) / l]
            }
            BoundarySegment::Arc { .. } => {
                let (a0, sweep) = self.arc_angles().unwrap();
                let a = a0 + t.clamp(0.0, 1.0) * sweep;
                let s = sweep.signum();
                [-s * a.sin(), s * a.cos()]
            }
        }
    }

    /// Moves `p` onto the segment curve. Lines are left untouched apart from
    /// orthogonal projection; arc points are pushed radially onto the circle.
    pub fn snap(&self, p: Point2) -> Point2 {
        match *self {
            BoundarySegment::Line { start, end } => {
                let d = [end[0] - start[0], end[1] - start[1]];
                let l2 = d[0] * d[0] + d[1] * d[1];
                let t = ((p[0] - start[0]) * d[0] + (p[1] - start[1]) * d[1]) / l2;
                let t = t.clamp(0.0, 1.0);
                [start[0] + t * d[0], start[1] + t * d[1]]
            }
            BoundarySegment::Arc { center, radius, .. } => {
                let v = [p[0] - center[0], p[1] - center[1]];
                let r = (v[0] * v[0] + v[1] * v[1]).sqrt();
                if r == 0.0 {
                    return p;
                }
                [center[0] + radius * v[0] / r, center[1] + radius * v[1] / r]
            }
        }
    }

    /// Distance from `p` to the segment curve.
    pub fn distance(&self, p: Point2) -> f64 {
        match *self {
            BoundarySegment::Line { .. } => dist(p, self.snap(p)),
            BoundarySegment::Arc { center, radius, .. } => {
                let (a0, sweep) = self.arc_angles().unwrap();
                let a = (p[1] - center[1]).atan2(p[0] - center[0]);
                // offset of `a` from the arc start along the sweep direction
                let off = if sweep > 0.0 {
                    (a - a0).rem_euclid(2.0 * PI)
                } else {
                    (a0 - a).rem_euclid(2.0 * PI)
                };
                if off <= sweep.abs() {
                    (dist(p, center) - radius).abs()
                } else {
                    dist(p, self.start()).min(dist(p, self.end()))
                }
            }
        }
    }

    /// Contribution of this segment to the Green's-theorem area integral
    /// ½∮(x dy − y dx).
    fn green_area(&self) -> f64 {
        match *self {
            BoundarySegment::Line { start, end } => 0.5 * (start[0] * end[1] - end[0] * start[1]),
            BoundarySegment::Arc { center, radius, .. } => {
                let (a0, sweep) = self.arc_angles().unwrap();
                let a1 = a0 + sweep;
                0.5 * (radius * radius * sweep
                    + radius * (center[0] * (a1.sin() - a0.sin()) - center[1] * (a1.cos() - a0.cos())))
            }
        }
    }
}

/// A boundary point where the tangent jumps.
#[derive(Debug, Clone, PartialEq)]
pub struct Corner {
    /// 1-based label in boundary order (P1, P2, ...).
    pub label: usize,
    pub point: Point2,
    /// Interior opening angle in radians.
    pub angle: f64,
    /// Index of the loop segment that starts at this corner.
    pub segment: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec2D {
    pub name: String,
    pub loops: Vec<Vec<BoundarySegment>>,
    pub corners: Vec<Corner>,
}

impl DomainSpec2D {
    /// Builds a domain from closed counter-clockwise loops and detects its
    /// corners from the tangent jumps between consecutive segments.
    pub fn from_loops(name: &str, loops: Vec<Vec<BoundarySegment>>) -> Result<Self> {
        if loops.is_empty() || loops.iter().any(|l| l.is_empty()) {
            return Err(Error::InvalidParameter("empty boundary loop".into()));
        }
        let mut corners = Vec::new();
        let mut offset = 0;
        for lp in &loops {
            for (i, seg) in lp.iter().enumerate() {
                let prev = &lp[(i + lp.len() - 1) % lp.len()];
                if prev.end() != seg.start() {
                    return Err(Error::InvalidParameter(format!(
                        "loop not closed at {:?} / {:?}",
                        prev.end(),
                        seg.start()
                    )));
                }
                let t_in = prev.tangent_at(1.0);
                let t_out = seg.tangent_at(0.0);
                let cross = t_in[0] * t_out[1] - t_in[1] * t_out[0];
                let dot = t_in[0] * t_out[0] + t_in[1] * t_out[1];
                let angle = PI - cross.atan2(dot);
                if (angle - PI).abs() > 1e-9 {
                    corners.push(Corner {
                        label: corners.len() + 1,
                        point: seg.start(),
                        angle,
                        segment: offset + i,
                    });
                }
            }
            offset += lp.len();
        }
        let spec = DomainSpec2D {
            name: name.to_string(),
            loops,
            corners,
        };
        if spec.area() <= 0.0 {
            return Err(Error::InvalidParameter(
                "boundary loop must be counter-clockwise".into(),
            ));
        }
        Ok(spec)
    }

    /// Closed polygon from counter-clockwise vertices.
    pub fn polygon(name: &str, vertices: &[Point2]) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::InvalidParameter("polygon needs 3 vertices".into()));
        }
        let segs = (0..n)
            .map(|i| BoundarySegment::line(vertices[i], vertices[(i + 1) % n]))
            .collect();
        Self::from_loops(name, vec![segs])
    }

    /// All segments of all loops, in global segment-index order.
    pub fn segments(&self) -> impl Iterator<Item = &BoundarySegment> {
        self.loops.iter().flatten()
    }

    pub fn segment(&self, index: usize) -> &BoundarySegment {
        self.segments().nth(index).expect("segment index")
    }

    pub fn num_segments(&self) -> usize {
        self.loops.iter().map(Vec::len).sum()
    }

    /// Exact enclosed area (arcs included analytically).
    pub fn area(&self) -> f64 {
        self.segments().map(BoundarySegment::green_area).sum()
    }

    pub fn corner(&self, label: usize) -> Option<&Corner> {
        self.corners.iter().find(|c| c.label == label)
    }

    /// Radius of the smallest disk containing the domain.
    pub fn enclosing_radius(&self) -> f64 {
        let mut pts = Vec::new();
        for seg in self.segments() {
            let samples = if seg.is_arc() { 2048 } else { 1 };
            for i in 0..samples {
                pts.push(seg.point_at(i as f64 / samples as f64));
            }
        }
        let (_, r) = min_enclosing_circle(&pts);
        // arc sampling can only underestimate; pad by the worst sagitta
        r * (1.0 + 1e-6)
    }
}

/// Welzl-style incremental minimal enclosing circle.
pub(crate) fn min_enclosing_circle(pts: &[Point2]) -> (Point2, f64) {
    let inside = |c: Point2, r: f64, p: Point2| dist(c, p) <= r * (1.0 + 1e-12) + 1e-15;
    let mut c = pts[0];
    let mut r = 0.0;
    for i in 1..pts.len() {
        if inside(c, r, pts[i]) {
            continue;
        }
        c = pts[i];
        r = 0.0;
        for j in 0..i {
            if inside(c, r, pts[j]) {
                continue;
            }
            c = [(pts[i][0] + pts[j][0]) / 2.0, (pts[i][1] + pts[j][1]) / 2.0];
            r = dist(c, pts[i]);
            for k in 0..j {
                if inside(c, r, pts[k]) {
                    continue;
                }
                if let Some(cc) = circumcenter(pts[i], pts[j], pts[k]) {
                    c = cc;
                    r = dist(c, pts[i]);
                }
            }
        }
    }
    (c, r)
}

fn circumcenter(a: Point2, b: Point2, c: Point2) -> Option<Point2> {
    let d = 2.0 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]));
    if d.abs() < 1e-300 {
        return None;
    }
    let a2 = a[0] * a[0] + a[1] * a[1];
    let b2 = b[0] * b[0] + b[1] * b[1];
    let c2 = c[0] * c[0] + c[1] * c[1];
    Some([
        (a2 * (b[1] - c[1]) + b2 * (c[1] - a[1]) + c2 * (a[1] - b[1])) / d,
        (a2 * (c[0] - b[0]) + b2 * (a[0] - c[0]) + c2 * (b[0] - a[0])) / d,
    ])
}

pub(crate) fn dist(a: Point2, b: Point2) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Names accepted by [`builtin_domain`].
pub const BUILTIN_DOMAINS: &[&str] = &[
    "equilateral_triangle",
    "right_triangle",
    "arrow",
    "moon",
    "unit_square",
    "isosceles",
    "sector",
    "disk",
];

/// Built-in experiment geometries.
///
/// `isosceles` takes `[height, apex_angle]`, `sector` takes
/// `[radius, angle]` and `disk` takes `[radius]` (default 1). The other
/// domains take no parameters.
pub fn builtin_domain(name: &str, params: &[f64]) -> Result<DomainSpec2D> {
    let s3 = 3f64.sqrt();
    let no_params = |n: &str| {
        if params.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("{n} takes no parameters")))
        }
    };
    match name {
        "equilateral_triangle" => {
            no_params(name)?;
            DomainSpec2D::polygon(name, &[[-1.0, 0.0], [1.0, 0.0], [0.0, s3]])
        }
        "right_triangle" => {
            no_params(name)?;
            DomainSpec2D::polygon(name, &[[s3, 0.0], [0.0, 1.0], [0.0, 0.0]])
        }
        "arrow" => {
            no_params(name)?;
            DomainSpec2D::polygon(name, &[[0.0, s3 / 3.0], [1.0, 0.0], [0.0, s3], [-1.0, 0.0]])
        }
        "unit_square" => {
            no_params(name)?;
            DomainSpec2D::polygon(name, &[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
        }
        "moon" => {
            no_params(name)?;
            let p1 = [0.0, -s3 / 2.0];
            let p2 = [0.0, s3 / 2.0];
            DomainSpec2D::from_loops(
                name,
                vec![vec![
                    BoundarySegment::arc(p1, p2, [0.5, 0.0], false)?,
                    BoundarySegment::arc(p2, p1, [-0.5, 0.0], true)?,
                ]],
            )
        }
        "isosceles" => {
            let [height, apex] = two_params(name, params)?;
            if height <= 0.0 || !(apex > 0.0 && apex < PI) {
                return Err(Error::InvalidParameter(format!(
                    "isosceles needs height > 0 and apex angle in (0, π), got {params:?}"
                )));
            }
            let half = height * (apex / 2.0).tan();
            DomainSpec2D::polygon(name, &[[0.0, height], [-half, 0.0], [half, 0.0]])
        }
        "sector" => {
            let [radius, angle] = two_params(name, params)?;
            if radius <= 0.0 || !(angle > 0.0 && angle < 2.0 * PI) || (angle - PI).abs() < 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "sector needs radius > 0 and angle in (0, 2π) \\ {{π}}, got {params:?}"
                )));
            }
            let o = [0.0, 0.0];
            let a = [radius, 0.0];
            let b = [radius * angle.cos(), radius * angle.sin()];
            DomainSpec2D::from_loops(
                name,
                vec![vec![
                    BoundarySegment::line(o, a),
                    BoundarySegment::arc(a, b, o, true)?,
                    BoundarySegment::line(b, o),
                ]],
            )
        }
        "disk" => {
            let radius = match params {
                [] => 1.0,
                [r] => *r,
                _ => return Err(Error::InvalidParameter("disk takes at most one parameter".into())),
            };
            if radius <= 0.0 {
                return Err(Error::InvalidParameter("disk radius must be > 0".into()));
            }
            let o = [0.0, 0.0];
            let a = [radius, 0.0];
            let b = [-radius, 0.0];
            DomainSpec2D::from_loops(
                name,
                vec![vec![
                    BoundarySegment::arc(a, b, o, true)?,
                    BoundarySegment::arc(b, a, o, true)?,
                ]],
            )
        }
        other => Err(Error::UnknownDomain(other.to_string())),
    }
}

fn two_params(name: &str, params: &[f64]) -> Result<[f64; 2]> {
    match params {
        [a, b] => Ok([*a, *b]),
        _ => Err(Error::InvalidParameter(format!(
            "{name} takes exactly two parameters, got {}",
            params.len()
        ))),
    }
}
