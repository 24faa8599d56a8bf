//! Bessel functions of integer order and spherical Bessel functions.
//!
//! `J_m` uses the power series for small arguments and Miller's downward
//! recurrence normalized by `J_0 + 2ΣJ_{2k} = 1` otherwise. Spherical `j_l`
//! uses closed forms for `l ≤ 2` and a downward recurrence normalized
//! against `j_0` or `j_1` above that.

use crate::{Error, Result};

pub const MAX_ORDER: usize = 60;
pub const MAX_ARGUMENT: f64 = 200.0;

const SERIES_LIMIT: f64 = 2.0;
const RESCALE: f64 = 1e250;

fn check(m: usize, x: f64) -> Result<()> {
    if m > MAX_ORDER || !(0.0..=MAX_ARGUMENT).contains(&x) {
        return Err(Error::OutOfRange(format!(
            "order {m}, argument {x} (need m ≤ {MAX_ORDER}, 0 ≤ x ≤ {MAX_ARGUMENT})"
        )));
    }
    Ok(())
}

/// `(J_m(x), J′_m(x))`.
pub fn bessel_j(m: usize, x: f64) -> Result<(f64, f64)> {
    check(m, x)?;
    Ok(bessel_j_unchecked(m, x))
}

pub(crate) fn bessel_j_unchecked(m: usize, x: f64) -> (f64, f64) {
    let j = bessel_j_all(m + 1, x);
    let d = if m == 0 { -j[1] } else { 0.5 * (j[m - 1] - j[m + 1]) };
    (j[m], d)
}

/// `J_0(x), …, J_mmax(x)`.
pub fn bessel_j_all(mmax: usize, x: f64) -> Vec<f64> {
    let x = x.abs();
    if x == 0.0 {
        let mut j = vec![0.0; mmax + 1];
        j[0] = 1.0;
        return j;
    }
    if x <= SERIES_LIMIT {
        return (0..=mmax).map(|m| series_j(m, x)).collect();
    }
    let top = mmax.max(x as usize) as f64;
    let mut start = (top + 20.0 + (40.0 * top).sqrt()) as usize;
    start += start % 2;
    let mut out = vec![0.0; mmax + 1];
    let (mut next, mut cur) = (0.0f64, 1.0f64);
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        if k <= mmax {
            out[k] = cur;
        }
        if k % 2 == 0 {
            norm += 2.0 * cur;
        }
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            next /= RESCALE;
            norm /= RESCALE;
            for v in out.iter_mut() {
                *v /= RESCALE;
            }
        }
    }
    out[0] = cur;
    norm += cur;
    out.iter().map(|v| v / norm).collect()
}

fn series_j(m: usize, x: f64) -> f64 {
    let h = 0.5 * x;
    let mut term = (1..=m).fold(1.0, |t, i| t * h / i as f64);
    let mut sum = term;
    for k in 1..60 {
        term *= -h * h / (k as f64 * (k + m) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// `(j_l(x), j′_l(x))` for the spherical Bessel function of the first kind.
pub fn spherical_j(l: usize, x: f64) -> Result<(f64, f64)> {
    check(l, x)?;
    Ok(spherical_j_unchecked(l, x))
}

pub(crate) fn spherical_j_unchecked(l: usize, x: f64) -> (f64, f64) {
    let j = spherical_j_all(l + 1, x);
    let d = if l == 0 {
        -j[1]
    } else if x == 0.0 {
        if l == 1 {
            1.0 / 3.0
        } else {
            0.0
        }
    } else {
        j[l - 1] - (l + 1) as f64 / x * j[l]
    };
    (j[l], d)
}

/// `j_0(x), …, j_lmax(x)`.
pub fn spherical_j_all(lmax: usize, x: f64) -> Vec<f64> {
    let x = x.abs();
    if x < 1.0 {
        return (0..=lmax).map(|l| series_spherical(l, x)).collect();
    }
    let (s, c) = x.sin_cos();
    let closed = [
        s / x,
        s / (x * x) - c / x,
        (3.0 / (x * x) - 1.0) * s / x - 3.0 * c / (x * x),
    ];
    if lmax <= 2 {
        return closed[..=lmax].to_vec();
    }
    let top = lmax.max(x as usize) as f64;
    let start = (top + 20.0 + (40.0 * top).sqrt()) as usize;
    let mut v = vec![0.0; start + 2];
    v[start] = 1e-300;
    for k in (1..=start).rev() {
        v[k - 1] = (2 * k + 1) as f64 / x * v[k] - v[k + 1];
        if v[k - 1].abs() > RESCALE {
            for w in &mut v[k - 1..] {
                *w /= RESCALE;
            }
        }
    }
    let scale = if closed[0].abs() >= closed[1].abs() {
        closed[0] / v[0]
    } else {
        closed[1] / v[1]
    };
    let mut out: Vec<f64> = v[..=lmax].iter().map(|w| w * scale).collect();
    out[..3].copy_from_slice(&closed);
    out
}

fn series_spherical(l: usize, x: f64) -> f64 {
    // x^l / (2l+1)!! · Σ (−x²/2)^k / (k! (2l+3)(2l+5)…(2l+2k+1))
    let mut term = (1..=l).fold(1.0, |t, i| t * x / (2 * i + 1) as f64);
    let mut sum = term;
    for k in 1..60 {
        term *= -0.5 * x * x / (k as f64 * (2 * l + 2 * k + 1) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_at_zero() {
        assert_eq!(bessel_j(0, 0.0).unwrap(), (1.0, 0.0));
        assert_eq!(bessel_j(3, 0.0).unwrap(), (0.0, 0.0));
        assert_eq!(spherical_j(0, 0.0).unwrap().0, 1.0);
        assert!(bessel_j(61, 1.0).is_err());
        assert!(bessel_j(1, 201.0).is_err());
    }

    #[test]
    fn known_values() {
        let cases = [
            (0, 1.0, 0.765_197_686_557_966_6),
            (1, 1.0, 0.440_050_585_744_933_5),
            (0, 10.0, -0.245_935_764_451_348_3),
            (5, 10.0, -0.234_061_528_186_793_7),
            (2, 50.0, -0.059_712_800_794_258_82),
            (0, 100.0, 0.019_985_850_304_223_122),
        ];
        for (m, x, want) in cases {
            let (j, _) = bessel_j(m, x).unwrap();
            assert!((j - want).abs() < 1e-12, "J_{m}({x}) = {j}, want {want}");
        }
        let (j, _) = bessel_j(40, 3.0).unwrap();
        assert!((j / 1.282_792_651_080_683_4e-41 - 1.0).abs() < 1e-10);
        let (j, _) = bessel_j(60, 200.0).unwrap();
        assert!((j - 0.034_156_500_001_273_42).abs() < 1e-10);
    }

    #[test]
    fn spherical_matches_closed_forms_and_series() {
        for &x in &[0.3, 0.999, 1.0, 2.5, 7.0, 31.0] {
            let all = spherical_j_all(8, x);
            let s = x.sin();
            assert!((all[0] - s / x).abs() < 1e-14);
            for l in 1..8 {
                // (2l+1)/x j_l = j_{l-1} + j_{l+1}
                let r = (2 * l + 1) as f64 / x * all[l] - all[l - 1] - all[l + 1];
                assert!(r.abs() < 1e-12, "l = {l}, x = {x}: {r}");
            }
        }
        let cases = [
            (5, 3.0, 0.016_397_480_955_999_116, 0.023_354_752_416_845_96),
            (10, 20.0, 0.039_686_698_644_626_37, 0.029_056_544_673_676_778),
            (3, 1.5, 0.028_324_641_582_471_825, 0.051_816_906_135_150_14),
        ];
        for (l, x, j, d) in cases {
            let (a, b) = spherical_j(l, x).unwrap();
            assert!((a - j).abs() < 1e-12 && (b - d).abs() < 1e-12, "l = {l}, x = {x}");
        }
        let (a, b) = spherical_j(30, 5.0).unwrap();
        assert!((a / 4.282_730_217_299_236e-22 - 1.0).abs() < 1e-10);
        assert!((b / 2.535_438_205_151_71e-21 - 1.0).abs() < 1e-10);
        let small = spherical_j_all(4, 0.999);
        let big = spherical_j_all(4, 1.0);
        for l in 0..=4 {
            assert!((small[l] - big[l]).abs() < 1e-3);
        }
    }
}
