//! Averaged L² norms of modes near corners, vertices and edges, power-law
//! rate fits and spectral sanity checks.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::Serialize;

use crate::geometry::Mesh;
use crate::problem::{FeatureKind, FeatureSpec};
use crate::solver::EigenPair;
use crate::{Error, Result, C64};

/// Subdivision depth of the neighbourhood quadrature.
pub const SUBDIVISION_LEVELS: usize = 4;
/// Slopes within ±SLOPE_MIN are not classified.
pub const SLOPE_MIN: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum FieldSelector {
    #[serde(rename = "u0")]
    U0,
    #[serde(rename = "u")]
    U,
    #[serde(rename = "u-u0")]
    Diff,
}

impl FieldSelector {
    pub fn name(self) -> &'static str {
        match self {
            FieldSelector::U0 => "u0",
            FieldSelector::U => "u",
            FieldSelector::Diff => "u-u0",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "u0" => Ok(FieldSelector::U0),
            "u" => Ok(FieldSelector::U),
            "u-u0" => Ok(FieldSelector::Diff),
            _ => Err(Error::Config(format!("unknown field `{s}` (expected u0, u or u-u0)"))),
        }
    }

    pub fn values(self, pair: &EigenPair) -> Vec<C64> {
        match self {
            FieldSelector::U0 => pair.u0.clone(),
            FieldSelector::U => pair.u.clone(),
            FieldSelector::Diff => pair.u.iter().zip(&pair.u0).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Sub-simplices of the reference simplex as barycentric vertex lists.
fn reference_subdivision(dim: usize) -> &'static [Vec<Vec<f64>>] {
    static TRI: OnceLock<Vec<Vec<Vec<f64>>>> = OnceLock::new();
    static TET: OnceLock<Vec<Vec<Vec<f64>>>> = OnceLock::new();
    let build = |dim: usize| {
        let mut cells: Vec<Vec<Vec<f64>>> = vec![(0..=dim)
            .map(|i| (0..=dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect()];
        for _ in 0..SUBDIVISION_LEVELS {
            let mut next = Vec::with_capacity(cells.len() * (1 << dim));
            for c in &cells {
                let mid =
                    |a: usize, b: usize| -> Vec<f64> { c[a].iter().zip(&c[b]).map(|(x, y)| 0.5 * (x + y)).collect() };
                if dim == 2 {
                    let (m01, m12, m20) = (mid(0, 1), mid(1, 2), mid(2, 0));
                    next.push(vec![c[0].clone(), m01.clone(), m20.clone()]);
                    next.push(vec![m01.clone(), c[1].clone(), m12.clone()]);
                    next.push(vec![m20.clone(), m12.clone(), c[2].clone()]);
                    next.push(vec![m01, m12, m20]);
                } else {
                    let (m01, m02, m03) = (mid(0, 1), mid(0, 2), mid(0, 3));
                    let (m12, m13, m23) = (mid(1, 2), mid(1, 3), mid(2, 3));
                    next.push(vec![c[0].clone(), m01.clone(), m02.clone(), m03.clone()]);
                    next.push(vec![m01.clone(), c[1].clone(), m12.clone(), m13.clone()]);
                    next.push(vec![m02.clone(), m12.clone(), c[2].clone(), m23.clone()]);
                    next.push(vec![m03.clone(), m13.clone(), m23.clone(), c[3].clone()]);
                    next.push(vec![m01.clone(), m02.clone(), m03.clone(), m13.clone()]);
                    next.push(vec![m01, m02.clone(), m12.clone(), m13.clone()]);
                    next.push(vec![m02.clone(), m03, m13.clone(), m23.clone()]);
                    next.push(vec![m02, m12, m13, m23]);
                }
            }
            cells = next;
        }
        cells
    };
    if dim == 2 {
        TRI.get_or_init(|| build(2))
    } else {
        TET.get_or_init(|| build(3))
    }
}

/// ∫|v|² over a simplex of measure `meas` for linear v with vertex values `a`.
fn linear_square_integral(meas: f64, a: &[C64]) -> f64 {
    let k = a.len() as f64;
    let s: C64 = a.iter().sum();
    let sq: f64 = a.iter().map(|x| x.norm_sqr()).sum();
    meas / (k * (k + 1.0)) * (sq + s.norm_sqr())
}

/// ‖v‖ / √measure over the part of the domain where `dist(x) < r`.
///
/// Cells within reach are split into congruent sub-simplices, each kept iff
/// its centroid is within `r`; numerator and denominator use the same
/// sub-cells.
fn delta_region<D>(values: &[C64], mesh: &Mesh, r: f64, dist: D) -> Result<f64>
where
    D: Fn([f64; 3]) -> f64,
{
    if values.len() != mesh.n_vertices() {
        return Err(Error::DimensionMismatch(format!(
            "{} values for {} vertices",
            values.len(),
            mesh.n_vertices()
        )));
    }
    let dim = mesh.dim();
    let subs = reference_subdivision(dim);
    let nsub = subs.len() as f64;
    let ones = vec![C64::new(1.0, 0.0); dim + 1];
    let (mut num, mut den) = (0.0, 0.0);
    let mut local = vec![C64::new(0.0, 0.0); dim + 1];
    for c in 0..mesh.n_cells() {
        let pts = mesh.cell_points(c);
        let cell = mesh.cell(c);
        let mut centroid = [0.0; 3];
        for p in &pts {
            for d in 0..3 {
                centroid[d] += p[d] / (dim + 1) as f64;
            }
        }
        let radius = pts
            .iter()
            .map(|p| crate::geometry::dist3(*p, centroid))
            .fold(0.0, f64::max);
        let dc = dist(centroid);
        if dc - radius >= r {
            continue;
        }
        let meas = mesh.signed_measure(c);
        let vals: Vec<C64> = cell.iter().map(|&v| values[v]).collect();
        if pts.iter().all(|p| dist(*p) < r) && dist(centroid) + radius < r {
            num += linear_square_integral(meas, &vals);
            den += linear_square_integral(meas, &ones);
            continue;
        }
        let sub_meas = meas / nsub;
        for sub in subs {
            let mut x = [0.0; 3];
            for lam in sub {
                for (p, l) in pts.iter().zip(lam) {
                    for d in 0..3 {
                        x[d] += l * p[d] / (dim + 1) as f64;
                    }
                }
            }
            if dist(x) >= r {
                continue;
            }
            for (slot, lam) in local.iter_mut().zip(sub) {
                *slot = vals.iter().zip(lam).map(|(v, l)| v * *l).sum();
            }
            num += linear_square_integral(sub_meas, &local);
            den += linear_square_integral(sub_meas, &ones);
        }
    }
    if den <= 0.0 {
        return Err(Error::Feature(format!("empty neighbourhood at r = {r}")));
    }
    Ok((num / den).sqrt())
}

fn diameter(mesh: &Mesh) -> f64 {
    let mut lo = [f64::MAX; 3];
    let mut hi = [f64::MIN; 3];
    for p in mesh.points() {
        for d in 0..3 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    crate::geometry::dist3(lo, hi)
}

fn check_radius(mesh: &Mesh, r: f64) -> Result<()> {
    let diam = diameter(mesh);
    if !(r > 0.0) || r > diam {
        return Err(Error::Feature(format!(
            "radius {r} outside (0, {diam}] (domain diameter)"
        )));
    }
    Ok(())
}

fn check_on_boundary(mesh: &Mesh, p: [f64; 3]) -> Result<()> {
    let v = mesh.nearest_vertex(p);
    if crate::geometry::dist3(mesh.point(v), p) > 1e-10 || !mesh.is_boundary(v) {
        return Err(Error::Feature(format!("point {p:?} is not on the boundary")));
    }
    Ok(())
}

/// δ over the ball B_r(p).
pub fn delta_corner(values: &[C64], mesh: &Mesh, p: [f64; 3], r: f64) -> Result<f64> {
    check_radius(mesh, r)?;
    check_on_boundary(mesh, p)?;
    delta_region(values, mesh, r, |x| crate::geometry::dist3(x, p))
}

fn segment_distance(x: [f64; 3], a: [f64; 3], b: [f64; 3]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let ax = [x[0] - a[0], x[1] - a[1], x[2] - a[2]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1] + ab[2] * ab[2];
    let t = ((ax[0] * ab[0] + ax[1] * ab[1] + ax[2] * ab[2]) / len2).clamp(0.0, 1.0);
    crate::geometry::dist3(x, [a[0] + t * ab[0], a[1] + t * ab[1], a[2] + t * ab[2]])
}

/// δ over the cylinder of radius r around the segment [a, b].
pub fn delta_edge(values: &[C64], mesh: &Mesh, a: [f64; 3], b: [f64; 3], r: f64) -> Result<f64> {
    check_radius(mesh, r)?;
    check_on_boundary(mesh, a)?;
    check_on_boundary(mesh, b)?;
    delta_region(values, mesh, r, |x| segment_distance(x, a, b))
}

pub fn delta_feature(values: &[C64], mesh: &Mesh, feature: &FeatureSpec, r: f64) -> Result<f64> {
    match feature.kind {
        FeatureKind::Point(p) => delta_corner(values, mesh, p, r),
        FeatureKind::Edge(a, b) => delta_edge(values, mesh, a, b, r),
    }
}

/// Halving radii `scale·2⁻¹ … scale·2⁻levels`, dropping those below four
/// times the mesh size at the feature.
/// Smallest admissible radius: four local mesh sizes at the feature.
pub fn radius_floor(mesh: &Mesh, feature: &FeatureSpec) -> f64 {
    let anchor = match feature.kind {
        FeatureKind::Point(p) => p,
        FeatureKind::Edge(a, _) => a,
    };
    4.0 * mesh.local_size(mesh.nearest_vertex(anchor))
}

/// `scale·2^-i` for `i = 1..=levels`, without radii below the floor.
pub fn radii_schedule(mesh: &Mesh, feature: &FeatureSpec, scale: f64, levels: usize) -> Vec<f64> {
    let floor = radius_floor(mesh, feature);
    (1..=levels)
        .map(|i| scale * 0.5f64.powi(i as i32))
        .filter(|&r| r >= floor)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaSeries {
    pub feature_id: String,
    pub mode: usize,
    pub field: FieldSelector,
    /// (r, δ) with r decreasing.
    pub samples: Vec<(f64, f64)>,
}

pub fn delta_series(
    pair: &EigenPair,
    mode: usize,
    field: FieldSelector,
    mesh: &Mesh,
    feature: &FeatureSpec,
    radii: &[f64],
) -> Result<DeltaSeries> {
    let values = field.values(pair);
    let samples = radii
        .iter()
        .map(|&r| delta_feature(&values, mesh, feature, r).map(|d| (r, d)))
        .collect::<Result<Vec<_>>>()?;
    Ok(DeltaSeries {
        feature_id: feature.id.clone(),
        mode,
        field,
        samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    #[serde(rename = "vanishing")]
    Vanishing,
    #[serde(rename = "localizing")]
    Localizing,
    #[serde(rename = "indeterminate")]
    Indeterminate,
}

impl Classification {
    pub fn of(slope: f64) -> Self {
        if slope > SLOPE_MIN {
            Classification::Vanishing
        } else if slope < -SLOPE_MIN {
            Classification::Localizing
        } else {
            Classification::Indeterminate
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Classification::Vanishing => "vanishing",
            Classification::Localizing => "localizing",
            Classification::Indeterminate => "indeterminate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    /// d log δ / d log r: positive when δ vanishes as r → 0.
    pub slope: f64,
    pub amplitude: f64,
    pub r2: f64,
    pub class: Classification,
}

/// Least-squares line through points; returns (slope, intercept, R²).
fn least_squares(xy: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 1e-14 * xy.iter().map(|p| p.0 * p.0).sum::<f64>().max(f64::MIN_POSITIVE)) {
        return Err(Error::Fit("degenerate design matrix".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = xy.iter().map(|p| (p.1 - my).powi(2)).sum();
    let ss_res: f64 = xy.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r2 = if ss_tot == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    Ok((slope, intercept, r2))
}

/// Samples below this fraction of the largest δ sit at the roundoff floor of
/// the eigenvector and carry no rate information.
pub const NOISE_FLOOR: f64 = 1e-9;

/// Fits δ = c·r^s.
pub fn fit_power_law(samples: &[(f64, f64)]) -> Result<RateFit> {
    let peak = samples
        .iter()
        .map(|&(_, d)| d)
        .filter(|d| d.is_finite())
        .fold(0.0, f64::max);
    let usable: Vec<(f64, f64)> = samples
        .iter()
        .filter(|&&(r, d)| {
            let ok = r > 0.0 && d > NOISE_FLOOR * peak && d.is_finite();
            if !ok {
                log::debug!("dropping sample (r = {r}, δ = {d})");
            }
            ok
        })
        .map(|&(r, d)| (r.ln(), d.ln()))
        .collect();
    if usable.len() < 4 {
        return Err(Error::Fit(format!(
            "{} usable samples, at least 4 required",
            usable.len()
        )));
    }
    let (slope, intercept, r2) = least_squares(&usable)?;
    Ok(RateFit {
        slope,
        amplitude: intercept.exp(),
        r2,
        class: Classification::of(slope),
    })
}

pub fn fit_rate(series: &DeltaSeries) -> Result<RateFit> {
    fit_power_law(&series.samples)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngleRateLaw {
    /// (ω, s) data.
    pub points: Vec<(f64, f64)>,
    pub a: f64,
    pub b: f64,
    /// Root-mean-square residual.
    pub residual: f64,
    pub r2: f64,
}

impl AngleRateLaw {
    pub fn predict(&self, omega: f64) -> f64 {
        self.a / omega + self.b
    }
}

/// Fits s = a/ω + b.
pub fn fit_angle_law(points: &[(f64, f64)]) -> Result<AngleRateLaw> {
    if points.len() < 3 {
        return Err(Error::Fit("at least 3 (ω, s) points required".into()));
    }
    for &(w, _) in points {
        if !(w > 0.0 && w < 2.0 * PI) || (w - PI).abs() < 1e-12 {
            return Err(Error::Fit(format!("angle {w} outside (0, 2π) \\ {{π}}")));
        }
    }
    let xy: Vec<(f64, f64)> = points.iter().map(|&(w, s)| (1.0 / w, s)).collect();
    let (a, b, r2) = least_squares(&xy)?;
    let residual = (xy.iter().map(|p| (p.1 - a * p.0 - b).powi(2)).sum::<f64>() / xy.len() as f64).sqrt();
    Ok(AngleRateLaw {
        points: points.to_vec(),
        a,
        b,
        residual,
        r2,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SpectralReport {
    pub real: Vec<usize>,
    /// Index pairs (k, conj k) with Im k > 0 first.
    pub conjugate_pairs: Vec<(usize, usize)>,
    pub unmatched: Vec<usize>,
    pub purely_imaginary: Vec<usize>,
}

impl SpectralReport {
    pub fn is_clean(&self) -> bool {
        self.unmatched.is_empty() && self.purely_imaginary.is_empty()
    }
}

/// Classifies eigenvalues as real, conjugate-paired, unmatched or purely
/// imaginary.
pub fn spectral_checks(ks: &[C64]) -> SpectralReport {
    let mut report = SpectralReport::default();
    let mut used = vec![false; ks.len()];
    for (i, &k) in ks.iter().enumerate() {
        if crate::solver::is_purely_imaginary(k) {
            report.purely_imaginary.push(i);
            used[i] = true;
        }
    }
    for (i, &k) in ks.iter().enumerate() {
        if used[i] {
            continue;
        }
        if k.im.abs() <= 1e-6 * k.norm() {
            report.real.push(i);
            used[i] = true;
            continue;
        }
        let partner = (0..ks.len()).find(|&j| j != i && !used[j] && (ks[j] - k.conj()).norm() <= 1e-6 * k.norm());
        used[i] = true;
        match partner {
            Some(j) => {
                used[j] = true;
                report.conjugate_pairs.push(if k.im > 0.0 { (i, j) } else { (j, i) });
            }
            None => report.unmatched.push(i),
        }
    }
    report
}
