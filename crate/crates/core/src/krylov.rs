//! Krylov–Schur iteration for the dominant eigenvalues of a linear operator.
//!
//! Complex arithmetic throughout, full (twice-iterated classical)
//! Gram–Schmidt reorthogonalization, restarts that keep an ordered Schur
//! basis of the Rayleigh quotient.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result, C64};

#[derive(Debug, Clone)]
pub struct KrylovOptions {
    /// Number of wanted eigenvalues (largest modulus).
    pub nev: usize,
    /// Basis size.
    pub ncv: usize,
    /// Ritz residual tolerance relative to |θ|.
    pub tol: f64,
    pub max_restarts: usize,
    pub seed: u64,
}

impl KrylovOptions {
    pub fn new(nev: usize) -> Self {
        KrylovOptions {
            nev,
            ncv: 3 * nev.max(2),
            tol: 1e-12,
            max_restarts: 300,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RitzPair {
    pub value: C64,
    /// Unit-norm Ritz vector.
    pub vector: Vec<C64>,
    /// ‖Op x − θ x‖ estimated from the Krylov relation.
    pub residual: f64,
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Orthogonalizes `w` against `basis` twice; returns the coefficients.
fn orthogonalize(basis: &[Vec<C64>], w: &mut [C64]) -> Vec<C64> {
    let mut h = vec![C64::new(0.0, 0.0); basis.len()];
    for _ in 0..2 {
        let c: Vec<C64> = basis.iter().map(|v| dot(v, w)).collect();
        for (v, &cj) in basis.iter().zip(&c) {
            for (wi, vi) in w.iter_mut().zip(v) {
                *wi -= cj * vi;
            }
        }
        for (hj, cj) in h.iter_mut().zip(c) {
            *hj += cj;
        }
    }
    h
}

/// Givens rotation `[c s; −s̄ c]` with real `c` zeroing `g` against `f`.
fn givens(f: C64, g: C64) -> (f64, C64) {
    if g.norm() == 0.0 {
        return (1.0, C64::new(0.0, 0.0));
    }
    if f.norm() == 0.0 {
        return (0.0, g.conj() / g.norm());
    }
    let fa = f.norm();
    let d = fa.hypot(g.norm());
    (fa / d, (f / fa) * g.conj() / d)
}

/// Swaps the adjacent diagonal entries k, k+1 of upper-triangular `t`,
/// updating the Schur vectors `q`.
fn swap_adjacent(t: &mut DMatrix<C64>, q: &mut DMatrix<C64>, k: usize) {
    let n = t.nrows();
    let (t11, t22) = (t[(k, k)], t[(k + 1, k + 1)]);
    let (c, s) = givens(t[(k, k + 1)], t22 - t11);
    // rows k, k+1 right of the block
    for j in k + 2..n {
        let (x, y) = (t[(k, j)], t[(k + 1, j)]);
        t[(k, j)] = x * c + s * y;
        t[(k + 1, j)] = y * c - s.conj() * x;
    }
    // columns k, k+1 above the block
    let sc = s.conj();
    for i in 0..k {
        let (x, y) = (t[(i, k)], t[(i, k + 1)]);
        t[(i, k)] = x * c + sc * y;
        t[(i, k + 1)] = y * c - s * x;
    }
    t[(k, k)] = t22;
    t[(k + 1, k + 1)] = t11;
    for i in 0..q.nrows() {
        let (x, y) = (q[(i, k)], q[(i, k + 1)]);
        q[(i, k)] = x * c + sc * y;
        q[(i, k + 1)] = y * c - s * x;
    }
}

/// Householder reduction of `a` to upper Hessenberg form, accumulating into `q`.
fn hessenberg(a: &mut DMatrix<C64>, q: &mut DMatrix<C64>) {
    let n = a.nrows();
    let zero = C64::new(0.0, 0.0);
    for k in 0..n.saturating_sub(2) {
        let mut v: Vec<C64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        let xn = norm(&v);
        if xn == 0.0 {
            continue;
        }
        let phase = if v[0].norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            v[0] / v[0].norm()
        };
        v[0] += phase * xn;
        let vn = norm(&v);
        v.iter_mut().for_each(|x| *x /= vn);
        // a ← P a P, q ← q P with P = I − 2 v vᴴ
        for j in 0..n {
            let d: C64 = v.iter().enumerate().map(|(i, vi)| vi.conj() * a[(k + 1 + i, j)]).sum();
            for (i, vi) in v.iter().enumerate() {
                a[(k + 1 + i, j)] -= vi * d * 2.0;
            }
        }
        for m in [&mut *a, &mut *q] {
            for r in 0..n {
                let d: C64 = v.iter().enumerate().map(|(i, vi)| m[(r, k + 1 + i)] * vi).sum();
                for (i, vi) in v.iter().enumerate() {
                    m[(r, k + 1 + i)] -= d * vi.conj() * 2.0;
                }
            }
        }
        for i in k + 2..n {
            a[(i, k)] = zero;
        }
    }
}

/// Complex Schur form by shifted QR iteration on the Hessenberg form.
fn schur(mut h: DMatrix<C64>) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    let n = h.nrows();
    let mut q = DMatrix::<C64>::identity(n, n);
    hessenberg(&mut h, &mut q);
    let zero = C64::new(0.0, 0.0);
    let scale = h.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let tiny = f64::MIN_POSITIVE.max(f64::EPSILON * scale * 1e-10);
    let mut hi = n.saturating_sub(1);
    let mut iter = 0;
    let mut total = 0;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let s = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            let sub = h[(l, l - 1)].norm();
            if sub <= f64::EPSILON * s || sub <= tiny {
                h[(l, l - 1)] = zero;
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > 100 * n.max(10) {
            return Err(Error::NoConvergence {
                restarts: 0,
                converged: n - hi - 1,
                wanted: n,
                worst: f64::NAN,
            });
        }
        let mu = if iter % 10 == 0 {
            h[(hi, hi)] + h[(hi, hi - 1)].norm() * 0.75
        } else {
            let (a, b, c, d) = (h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)]);
            let half = (a - d) * 0.5;
            let disc = (half * half + b * c).sqrt();
            let (m1, m2) = ((a + d) * 0.5 + disc, (a + d) * 0.5 - disc);
            if (m1 - d).norm() < (m2 - d).norm() {
                m1
            } else {
                m2
            }
        };
        let mut x = h[(l, l)] - mu;
        let mut y = h[(l + 1, l)];
        for k in l..hi {
            if k > l {
                x = h[(k, k - 1)];
                y = h[(k + 1, k - 1)];
            }
            let (c, s) = givens(x, y);
            let sc = s.conj();
            for j in k.saturating_sub(1).max(l)..n {
                let (p, r) = (h[(k, j)], h[(k + 1, j)]);
                h[(k, j)] = p * c + s * r;
                h[(k + 1, j)] = r * c - sc * p;
            }
            if k > l {
                h[(k + 1, k - 1)] = zero;
            }
            for i in 0..=(k + 2).min(hi) {
                let (p, r) = (h[(i, k)], h[(i, k + 1)]);
                h[(i, k)] = p * c + sc * r;
                h[(i, k + 1)] = r * c - s * p;
            }
            for i in 0..n {
                let (p, r) = (q[(i, k)], q[(i, k + 1)]);
                q[(i, k)] = p * c + sc * r;
                q[(i, k + 1)] = r * c - s * p;
            }
        }
    }
    for j in 0..n {
        for i in j + 1..n {
            h[(i, j)] = zero;
        }
    }
    Ok((q, h))
}

/// Schur form `a = q t qᴴ` with diagonal sorted by decreasing modulus.
pub fn sorted_schur(a: DMatrix<C64>) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    let n = a.nrows();
    let (mut q, mut t) = schur(a)?;
    // insertion sort by adjacent swaps
    for i in 1..n {
        let mut k = i;
        while k > 0 && t[(k, k)].norm() > t[(k - 1, k - 1)].norm() {
            swap_adjacent(&mut t, &mut q, k - 1);
            k -= 1;
        }
    }
    Ok((q, t))
}

/// Unit eigenvector of upper-triangular `t` for its i-th diagonal entry.
fn triangular_eigenvector(t: &DMatrix<C64>, i: usize) -> Vec<C64> {
    let n = t.nrows();
    let theta = t[(i, i)];
    let tiny = 1e-14 * theta.norm().max(f64::MIN_POSITIVE);
    let mut y = vec![C64::new(0.0, 0.0); n];
    y[i] = C64::new(1.0, 0.0);
    for r in (0..i).rev() {
        let mut s = C64::new(0.0, 0.0);
        for c in r + 1..=i {
            s += t[(r, c)] * y[c];
        }
        let mut d = t[(r, r)] - theta;
        if d.norm() < tiny {
            d = C64::new(tiny, 0.0);
        }
        y[r] = -s / d;
    }
    let nrm = norm(&y);
    y.iter().map(|v| v / nrm).collect()
}

/// Computes the `nev` eigenvalues of largest modulus of `op` (an n×n
/// operator) with their Ritz vectors.
pub fn krylov_schur<F>(n: usize, mut op: F, opts: &KrylovOptions) -> Result<Vec<RitzPair>>
where
    F: FnMut(&[C64]) -> Vec<C64>,
{
    let nev = opts.nev.min(n);
    let m = opts.ncv.max(nev + 2).min(n);
    if nev == 0 {
        return Ok(Vec::new());
    }
    let zero = C64::new(0.0, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut random_vector = |basis: &[Vec<C64>]| -> Vec<C64> {
        if basis.len() >= n {
            return vec![zero; n];
        }
        loop {
            let mut v: Vec<C64> = (0..n).map(|_| C64::new(rng.random_range(-1.0..1.0), 0.0)).collect();
            orthogonalize(basis, &mut v);
            let nv = norm(&v);
            if nv > 1e-8 {
                return v.iter().map(|x| x / nv).collect();
            }
        }
    };

    let mut basis: Vec<Vec<C64>> = vec![random_vector(&[])];
    // (m+1)×m projected matrix; row `k` after a restart holds the residual coupling
    let mut h = DMatrix::<C64>::zeros(m + 1, m);
    let mut k = 0;
    let mut worst = f64::INFINITY;
    let mut converged = 0;

    for restart in 0..=opts.max_restarts {
        for j in k..m {
            let mut w = op(&basis[j]);
            let wnorm0 = norm(&w);
            let coeffs = orthogonalize(&basis, &mut w);
            for (i, c) in coeffs.into_iter().enumerate() {
                h[(i, j)] += c;
            }
            let beta = norm(&w);
            if beta <= 1e-12 * wnorm0.max(f64::MIN_POSITIVE) {
                // invariant subspace found: continue with a fresh direction
                h[(j + 1, j)] = zero;
                basis.push(random_vector(&basis));
            } else {
                h[(j + 1, j)] = C64::new(beta, 0.0);
                basis.push(w.iter().map(|x| x / beta).collect());
            }
        }

        let s = h.view((0, 0), (m, m)).into_owned();
        let b = h.row(m).into_owned();
        let (q, t) = sorted_schur(s)?;
        let bq = &b * &q;

        let mut residuals = Vec::with_capacity(nev);
        for i in 0..nev {
            let y = triangular_eigenvector(&t, i);
            let r: C64 = (0..=i).map(|c| bq[c] * y[c]).sum();
            residuals.push(r.norm());
        }
        converged = (0..nev)
            .filter(|&i| residuals[i] <= opts.tol * t[(i, i)].norm())
            .count();
        worst = (0..nev)
            .map(|i| residuals[i] / t[(i, i)].norm().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max);
        log::trace!("restart {restart}: {converged}/{nev} converged, worst {worst:e}");

        if converged == nev {
            let mut out = Vec::with_capacity(nev);
            for i in 0..nev {
                let y = triangular_eigenvector(&t, i);
                let qy = &q * nalgebra::DVector::from_vec(y);
                let mut x = vec![zero; n];
                for (c, v) in basis.iter().take(m).enumerate() {
                    let coef = qy[c];
                    for (xi, vi) in x.iter_mut().zip(v) {
                        *xi += coef * vi;
                    }
                }
                let nx = norm(&x);
                out.push(RitzPair {
                    value: t[(i, i)],
                    vector: x.iter().map(|v| v / nx).collect(),
                    residual: residuals[i],
                });
            }
            return Ok(out);
        }
        if restart == opts.max_restarts {
            break;
        }

        // thick restart keeping the leading p Schur vectors
        let p = (nev + converged.min((m - nev) / 2)).max(nev + (m - nev) / 3).min(m - 1);
        let mut new_basis = Vec::with_capacity(m + 1);
        for c in 0..p {
            let mut v = vec![zero; n];
            for (r, bv) in basis.iter().take(m).enumerate() {
                let coef = q[(r, c)];
                if coef != zero {
                    for (vi, bi) in v.iter_mut().zip(bv) {
                        *vi += coef * bi;
                    }
                }
            }
            new_basis.push(v);
        }
        new_basis.push(basis.swap_remove(m));
        basis = new_basis;
        let mut hn = DMatrix::<C64>::zeros(m + 1, m);
        for c in 0..p {
            for r in 0..=c {
                hn[(r, c)] = t[(r, c)];
            }
            hn[(p, c)] = bq[c];
        }
        h = hn;
        k = p;
    }
    Err(Error::NoConvergence {
        restarts: opts.max_restarts,
        converged,
        wanted: nev,
        worst,
    })
}
