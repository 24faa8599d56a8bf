//! Problem data: the refractive index, the domain and the boundary features
//! whose neighbourhoods are analysed.

use crate::expr::{self, Expr};
use crate::geometry::{builtin_domain, mesh_cube, mesh_domain, refine_uniform, DomainSpec2D, Mesh};
use crate::{Error, Result};

/// Minimum number of sample points used for index checks.
const MIN_SAMPLES: usize = 100;

/// Refractive index n(x, y, z) given as an expression.
#[derive(Debug, Clone, PartialEq)]
pub struct RefractiveIndex {
    text: String,
    expr: Expr,
    constant: Option<f64>,
}

pub fn parse_index(text: &str) -> Result<RefractiveIndex> {
    let expr = expr::parse(text)?;
    let constant = if expr.is_constant() {
        let v = expr.eval([0.0; 3]);
        if !v.is_finite() {
            return Err(Error::NonFinite { x: 0.0, y: 0.0, z: 0.0 });
        }
        Some(v)
    } else {
        None
    };
    Ok(RefractiveIndex {
        text: text.to_string(),
        expr,
        constant,
    })
}

pub fn eval_index(n: &RefractiveIndex, p: [f64; 3]) -> Result<f64> {
    n.eval(p)
}

impl RefractiveIndex {
    pub fn constant(value: f64) -> Self {
        RefractiveIndex {
            text: format!("{value:?}"),
            expr: Expr::Num(value),
            constant: Some(value),
        }
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    /// Value of a coordinate-free index.
    pub fn as_constant(&self) -> Option<f64> {
        self.constant
    }

    pub fn eval(&self, p: [f64; 3]) -> Result<f64> {
        if let Some(c) = self.constant {
            return Ok(c);
        }
        let v = self.expr.eval(p);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite {
                x: p[0],
                y: p[1],
                z: p[2],
            })
        }
    }

    /// Samples n at the vertices, cell centroids and edge midpoints of `mesh`.
    pub fn sample(&self, mesh: &Mesh) -> Result<IndexSample> {
        let mut pts: Vec<[f64; 3]> = mesh.points().to_vec();
        for c in 0..mesh.n_cells() {
            let cp = mesh.cell_points(c);
            let k = cp.len() as f64;
            let mut g = [0.0; 3];
            for p in &cp {
                for d in 0..3 {
                    g[d] += p[d] / k;
                }
            }
            pts.push(g);
        }
        for (a, b) in mesh.edges() {
            let (pa, pb) = (mesh.point(a), mesh.point(b));
            pts.push([(pa[0] + pb[0]) / 2.0, (pa[1] + pb[1]) / 2.0, (pa[2] + pb[2]) / 2.0]);
            if pts.len() >= 200_000 {
                break;
            }
        }
        let mut s = IndexSample {
            inf: f64::MAX,
            sup: f64::MIN,
            max_contrast: 0.0,
            count: pts.len(),
        };
        for p in pts {
            let v = self.eval(p)?;
            s.inf = s.inf.min(v);
            s.sup = s.sup.max(v);
            s.max_contrast = s.max_contrast.max((v - 1.0).abs());
        }
        if s.count < MIN_SAMPLES {
            log::debug!("index sampled at only {} points", s.count);
        }
        Ok(s)
    }
}

/// Sampled range of the refractive index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexSample {
    pub inf: f64,
    pub sup: f64,
    /// max |n − 1| over the samples.
    pub max_contrast: f64,
    pub count: usize,
}

/// Which side of 1 the index stays on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Contrast {
    /// n ≥ 1 + α everywhere.
    Above,
    /// n ≤ 1 − β everywhere.
    Below,
    /// n crosses 1 or touches it.
    Mixed,
}

impl IndexSample {
    pub fn is_identically_one(&self) -> bool {
        self.max_contrast <= 1e-8
    }

    pub fn contrast(&self) -> Contrast {
        if self.inf > 1.0 {
            Contrast::Above
        } else if self.sup < 1.0 && self.inf > 0.0 {
            Contrast::Below
        } else {
            Contrast::Mixed
        }
    }
}

/// Domain of a transmission problem.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Planar(DomainSpec2D),
    /// The cube [−½, ½]³.
    Cube,
}

impl Domain {
    pub fn from_name(name: &str, params: &[f64]) -> Result<Domain> {
        if name == "cube" {
            if !params.is_empty() {
                return Err(Error::InvalidParameter("cube takes no parameters".into()));
            }
            Ok(Domain::Cube)
        } else {
            builtin_domain(name, params).map(Domain::Planar)
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Planar(_) => 2,
            Domain::Cube => 3,
        }
    }

    pub fn measure(&self) -> f64 {
        match self {
            Domain::Planar(s) => s.area(),
            Domain::Cube => 1.0,
        }
    }

    /// Radius of the smallest ball containing the domain.
    pub fn enclosing_radius(&self) -> f64 {
        match self {
            Domain::Planar(s) => s.enclosing_radius(),
            Domain::Cube => 3f64.sqrt() / 2.0,
        }
    }

    /// Default features: every corner in 2D; the vertex (−½,−½,−½) and the
    /// edge from it along z for the cube.
    pub fn default_features(&self) -> Vec<FeatureSpec> {
        match self {
            Domain::Planar(s) => s
                .corners
                .iter()
                .map(|c| FeatureSpec {
                    id: format!("P{}", c.label),
                    kind: FeatureKind::Point([c.point[0], c.point[1], 0.0]),
                    angle: Some(c.angle),
                })
                .collect(),
            Domain::Cube => vec![
                FeatureSpec {
                    id: "P".into(),
                    kind: FeatureKind::Point([-0.5, -0.5, -0.5]),
                    angle: None,
                },
                FeatureSpec {
                    id: "E".into(),
                    kind: FeatureKind::Edge([-0.5, -0.5, -0.5], [-0.5, -0.5, 0.5]),
                    angle: Some(std::f64::consts::FRAC_PI_2),
                },
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeatureKind {
    /// Corner point (2D) or vertex (3D).
    Point([f64; 3]),
    /// Straight edge between two points (3D).
    Edge([f64; 3], [f64; 3]),
}

/// A singular boundary feature whose neighbourhood is analysed.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSpec {
    pub id: String,
    pub kind: FeatureKind,
    /// Opening angle (2D corners) or dihedral angle (edges).
    pub angle: Option<f64>,
}

impl FeatureSpec {
    /// Rough length scale of the boundary around the feature.
    pub fn scale(&self, domain: &Domain) -> f64 {
        match (&self.kind, domain) {
            (FeatureKind::Point(p), Domain::Planar(spec)) => spec
                .segments()
                .filter(|s| {
                    let (a, b) = (s.start(), s.end());
                    (a[0] - p[0]).hypot(a[1] - p[1]) < 1e-12 || (b[0] - p[0]).hypot(b[1] - p[1]) < 1e-12
                })
                .map(|s| s.length())
                .fold(f64::MAX, f64::min)
                .min(1.0),
            _ => 1.0,
        }
    }

    /// Checks the feature lies on the mesh boundary.
    pub fn check_on_boundary(&self, mesh: &Mesh) -> Result<()> {
        let pts: Vec<[f64; 3]> = match &self.kind {
            FeatureKind::Point(p) => vec![*p],
            FeatureKind::Edge(a, b) => vec![*a, *b],
        };
        for p in pts {
            let v = mesh.nearest_vertex(p);
            let q = mesh.point(v);
            let d = ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2) + (q[2] - p[2]).powi(2)).sqrt();
            if d > 1e-10 || !mesh.is_boundary(v) {
                return Err(Error::Feature(format!(
                    "feature {} point {p:?} is not a boundary vertex",
                    self.id
                )));
            }
        }
        Ok(())
    }
}

/// A complete problem: domain, index and mesh resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionProblem {
    pub domain: Domain,
    pub index: RefractiveIndex,
    /// Target edge length of the initial mesh.
    pub h: f64,
    /// Number of uniform refinements applied after meshing (2D only).
    pub refinements: usize,
}

impl TransmissionProblem {
    pub fn build_mesh(&self) -> Result<Mesh> {
        match &self.domain {
            Domain::Planar(spec) => {
                let mut mesh = mesh_domain(spec, self.h)?;
                for _ in 0..self.refinements {
                    mesh = refine_uniform(&mesh, spec)?;
                }
                Ok(mesh)
            }
            Domain::Cube => {
                let h = self.h / (1usize << self.refinements) as f64;
                mesh_cube(h)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_index() {
        let n = parse_index("16").unwrap();
        assert_eq!(n.as_constant(), Some(16.0));
        assert_eq!(eval_index(&n, [3.0, 4.0, 5.0]).unwrap(), 16.0);
        assert_eq!(eval_index(&parse_index("x+y").unwrap(), [1.0, 2.0, 0.0]).unwrap(), 3.0);
    }

    #[test]
    fn division_by_zero_is_reported() {
        let n = parse_index("1/x").unwrap();
        assert!(matches!(n.eval([0.0; 3]), Err(Error::NonFinite { .. })));
        assert!(matches!(parse_index("1/0"), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn right_triangle_index_range() {
        let p = TransmissionProblem {
            domain: Domain::from_name("right_triangle", &[]).unwrap(),
            index: parse_index("16+8*sin(4*x*y)").unwrap(),
            h: 0.1,
            refinements: 0,
        };
        let mesh = p.build_mesh().unwrap();
        let s = p.index.sample(&mesh).unwrap();
        assert!(s.count >= MIN_SAMPLES);
        assert!(s.inf >= 8.0 && s.sup <= 24.0);
        assert_eq!(s.contrast(), Contrast::Above);
        assert!(!s.is_identically_one());
    }

    #[test]
    fn identically_one_is_detected() {
        let p = TransmissionProblem {
            domain: Domain::from_name("unit_square", &[]).unwrap(),
            index: parse_index("1+0*x").unwrap(),
            h: 0.1,
            refinements: 0,
        };
        let s = p.index.sample(&p.build_mesh().unwrap()).unwrap();
        assert!(s.is_identically_one());
        assert_eq!(s.contrast(), Contrast::Mixed);
        let below = parse_index("0.25").unwrap().sample(&p.build_mesh().unwrap()).unwrap();
        assert_eq!(below.contrast(), Contrast::Below);
    }

    #[test]
    fn default_features() {
        let d = Domain::from_name("arrow", &[]).unwrap();
        let f = d.default_features();
        assert_eq!(f.len(), 4);
        assert_eq!(f[0].id, "P1");
        let cube = Domain::Cube.default_features();
        assert_eq!(cube.len(), 2);
        let m = TransmissionProblem {
            domain: Domain::Cube,
            index: RefractiveIndex::constant(16.0),
            h: 0.5,
            refinements: 0,
        }
        .build_mesh()
        .unwrap();
        for feat in &cube {
            feat.check_on_boundary(&m).unwrap();
        }
    }
}
