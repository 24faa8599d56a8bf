//! Transmission eigenvalues of the unit disk and ball with constant index.
//!
//! Separation of variables reduces the problem to the zeros in `k` of
//! `d_m(k) = J_m(k√n)·J′_m(k) − √n·J_m(k)·J′_m(k√n)` (2D) or the same
//! expression with spherical `j_m` (3D).

use serde::Serialize;

use crate::bessel::{bessel_j_unchecked, spherical_j_unchecked};
use crate::{Error, Result};

pub const MAX_ANGULAR_ORDER: usize = 40;
pub const SCAN_CAP: f64 = 50.0;
pub const SCAN_STEP: f64 = 1e-3;
pub const FINE_SCAN_STEP: f64 = 1e-4;
const ROOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Geometry {
    Disk,
    Ball,
}

impl Geometry {
    pub fn name(self) -> &'static str {
        match self {
            Geometry::Disk => "disk",
            Geometry::Ball => "ball",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "disk" => Ok(Geometry::Disk),
            "ball" => Ok(Geometry::Ball),
            _ => Err(Error::InvalidParameter(format!("unknown radial geometry `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialDeterminant {
    pub geometry: Geometry,
    pub order: usize,
    pub index: f64,
}

impl RadialDeterminant {
    /// Unchecked constructor; `n = 1` gives the identically zero function.
    pub fn new(geometry: Geometry, order: usize, index: f64) -> Self {
        RadialDeterminant { geometry, order, index }
    }

    pub fn eval(&self, k: f64) -> f64 {
        let s = self.index.sqrt();
        let f = match self.geometry {
            Geometry::Disk => bessel_j_unchecked,
            Geometry::Ball => spherical_j_unchecked,
        };
        let (a, da) = f(self.order, k * s);
        let (b, db) = f(self.order, k);
        a * db - s * b * da
    }
}

fn check_index(n: f64) -> Result<()> {
    if !(n > 0.0 && n.is_finite()) || n == 1.0 {
        return Err(Error::InvalidParameter(format!(
            "constant index must be positive and different from 1, got {n}"
        )));
    }
    Ok(())
}

fn bisect(d: &RadialDeterminant, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = d.eval(lo);
    while hi - lo > ROOT_TOL * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        let fm = d.eval(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Sign-change roots of `d` in `(0, cap]`, at most `limit` of them.
fn scan(d: &RadialDeterminant, step: f64, cap: f64, limit: usize) -> Vec<f64> {
    let mut roots = Vec::new();
    let steps = (cap / step).round() as usize;
    let mut prev = d.eval(step);
    for i in 2..=steps {
        if roots.len() >= limit {
            break;
        }
        let k = i as f64 * step;
        let cur = d.eval(k);
        if prev * cur < 0.0 {
            roots.push(bisect(d, k - step, k));
        }
        prev = cur;
    }
    roots
}

fn first_root(geometry: Geometry, n: f64, step: f64) -> Option<f64> {
    let mut best: Option<f64> = None;
    for m in 0..=MAX_ANGULAR_ORDER {
        let cap = best.unwrap_or(SCAN_CAP);
        let d = RadialDeterminant::new(geometry, m, n);
        if let Some(&k) = scan(&d, step, cap, 1).first() {
            if best.is_none_or(|b| k < b) {
                best = Some(k);
            }
        }
    }
    best
}

/// Smallest positive transmission eigenvalue `k` of the unit disk or ball.
pub fn first_te(geometry: Geometry, n: f64) -> Result<f64> {
    check_index(n)?;
    first_root(geometry, n, SCAN_STEP)
        .or_else(|| {
            log::warn!("no {} root at step {SCAN_STEP}, rescanning", geometry.name());
            first_root(geometry, n, FINE_SCAN_STEP)
        })
        .ok_or(Error::NoRoot(SCAN_CAP))
}

pub fn disk_first_te(n: f64) -> Result<f64> {
    first_te(Geometry::Disk, n)
}

pub fn ball_first_te(n: f64) -> Result<f64> {
    first_te(Geometry::Ball, n)
}

/// All roots below `cap` for each order `0..=max_order`.
pub fn radial_roots(geometry: Geometry, n: f64, max_order: usize, cap: f64) -> Result<Vec<(usize, Vec<f64>)>> {
    check_index(n)?;
    if !(cap > 0.0 && cap <= SCAN_CAP) || max_order > MAX_ANGULAR_ORDER {
        return Err(Error::OutOfRange(format!(
            "cap {cap} must lie in (0, {SCAN_CAP}] and order {max_order} ≤ {MAX_ANGULAR_ORDER}"
        )));
    }
    Ok((0..=max_order)
        .map(|m| {
            let d = RadialDeterminant::new(geometry, m, n);
            (m, scan(&d, SCAN_STEP, cap, usize::MAX))
        })
        .collect())
}
