//! Transmission eigenvalues from the pencil by shift-invert Krylov–Schur.

use crate::assembly::{assemble_dirichlet, Pencil};
use crate::geometry::{partition_dofs, Mesh};
use crate::krylov::{krylov_schur, KrylovOptions};
use crate::lu::{lu_factor, Factorization};
use crate::sparse::SparseMatrix;
use crate::{Error, Result, C64};

/// Relative distance under which eigenvalues are merged into one cluster.
pub const CLUSTER_TOL: f64 = 1e-6;
/// Relative imaginary part below which an eigenvalue counts as real.
const REAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchWindow {
    pub k_min: f64,
    pub k_max: f64,
    pub sigma: f64,
    /// Number of eigenvalues computed nearest to σ.
    pub count: usize,
}

impl SearchWindow {
    /// Window with shift `σ`, defaulting to `1.1·k_min²`.
    pub fn new(k_min: f64, k_max: f64, sigma: Option<f64>, count: usize) -> Result<Self> {
        if !(k_min > 0.0 && k_min < k_max && k_max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "search window requires 0 < k_min < k_max, got [{k_min}, {k_max}]"
            )));
        }
        let sigma = sigma.unwrap_or(1.1 * k_min * k_min);
        if !(sigma >= k_min * k_min && sigma <= k_max * k_max) {
            return Err(Error::InvalidParameter(format!(
                "shift {sigma} outside [{}, {}]",
                k_min * k_min,
                k_max * k_max
            )));
        }
        if count == 0 {
            return Err(Error::InvalidParameter("eigenvalue count must be positive".into()));
        }
        Ok(SearchWindow {
            k_min,
            k_max,
            sigma,
            count,
        })
    }

    pub fn contains(&self, k: C64) -> bool {
        let m = k.norm();
        m >= self.k_min && m <= self.k_max
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Bound on ‖AX − λBX‖/‖X‖.
    pub tol: f64,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-8,
            max_restarts: 300,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub k: C64,
    pub lambda: C64,
    pub multiplicity: usize,
    /// Per-vertex coefficients of the free field.
    pub u0: Vec<C64>,
    /// Per-vertex coefficients of the field with refractive index n.
    pub u: Vec<C64>,
    /// Raw pencil vector.
    pub x: Vec<C64>,
    pub residual: f64,
    /// Purely imaginary k: impossible for a valid transmission problem.
    pub imaginary: bool,
}

impl EigenPair {
    pub fn from_pencil(pencil: &Pencil, lambda: C64, x: Vec<C64>) -> Self {
        let (u, u0) = pencil.split_fields(&x);
        let k = principal_sqrt(lambda);
        let residual = pencil_residual(&pencil.a, &pencil.b, lambda, &x);
        EigenPair {
            k,
            lambda,
            multiplicity: 1,
            u0,
            u,
            x,
            residual,
            imaginary: is_purely_imaginary(k),
        }
    }
}

/// √λ with Re ≥ 0; negative reals map to the positive imaginary axis.
pub fn principal_sqrt(lambda: C64) -> C64 {
    let k = lambda.sqrt();
    if k.re < 0.0 || (k.re == 0.0 && k.im < 0.0) {
        -k
    } else {
        k
    }
}

pub fn is_purely_imaginary(k: C64) -> bool {
    k.re.abs() < 1e-8 && k.im.abs() > 1e-6
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// ‖A x − λ B x‖₂ / ‖x‖₂.
pub fn pencil_residual(a: &SparseMatrix, b: &SparseMatrix, lambda: C64, x: &[C64]) -> f64 {
    let ax = a.mul_vec_complex(x);
    let bx = b.mul_vec_complex(x);
    let r: Vec<C64> = ax.iter().zip(&bx).map(|(p, q)| p - lambda * q).collect();
    norm(&r) / norm(x)
}

/// Factors `A − σB`, nudging σ away from an eigenvalue if it is singular.
fn factor_shifted(a: &SparseMatrix, b: &SparseMatrix, sigma: f64) -> Result<(f64, Factorization)> {
    let mut s = sigma;
    let mut last = None;
    for attempt in 0..4 {
        let shifted = a.linear_combination(1.0, b, -s)?;
        match lu_factor(&shifted) {
            Ok(f) => return Ok((s, f)),
            Err(Error::SingularMatrix(msg)) => {
                log::warn!("shift {s} is singular ({msg}), perturbing");
                last = Some(msg);
                s = sigma * (1.0 + 1e-6 * (attempt + 1) as f64);
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::SingularMatrix(last.unwrap_or_default()))
}

/// Pair scaled to `u₀ᴴ M u₀ = 1`, phase fixed so the largest-modulus entry
/// of `u₀` is real positive.
pub fn normalize(pair: &EigenPair, mass: &SparseMatrix) -> Result<EigenPair> {
    let mu = mass.mul_vec_complex(&pair.u0);
    let q: C64 = pair.u0.iter().zip(&mu).map(|(a, b)| a.conj() * b).sum();
    let nrm = q.re.max(0.0).sqrt();
    if !(nrm > 1e-300) || !nrm.is_finite() {
        return Err(Error::ZeroEigenfunction);
    }
    let top = pair.u0.iter().copied().fold(
        C64::new(0.0, 0.0),
        |best, v| if v.norm() > best.norm() { v } else { best },
    );
    let phase = top.conj() / top.norm();
    let f = phase / nrm;
    let scale = |v: &[C64]| v.iter().map(|x| x * f).collect::<Vec<_>>();
    let mut out = pair.clone();
    out.u0 = scale(&pair.u0);
    out.u = scale(&pair.u);
    out.x = scale(&pair.x);
    if let Some(big) = out.u0.iter_mut().reduce(|a, b| if b.norm() > a.norm() { b } else { a }) {
        big.im = 0.0;
    }
    Ok(out)
}

/// Finds the transmission eigenvalues of `pencil` in `window`.
pub fn shift_invert_arnoldi(pencil: &Pencil, window: &SearchWindow, opts: &SolverOptions) -> Result<Vec<EigenPair>> {
    let (a, b) = (&pencil.a, &pencil.b);
    let (sigma, lu) = factor_shifted(a, b, window.sigma)?;
    let shifted_norm = a.linear_combination(1.0, b, -sigma)?.norm_inf();
    // (A − σB)⁻¹A = I + σ(A − σB)⁻¹B has the eigenvalues μ = λ/(λ − σ); the
    // kernel of A (k = 0 harmonic pairs u = u₀) is mapped to μ = 0 exactly
    // instead of competing with the wanted eigenvalues near σ.
    let op = |x: &[C64]| lu.solve_complex(&a.mul_vec_complex(x));

    let tol = (opts.tol / (10.0 * shifted_norm.max(1.0))).max(1e-14);
    // The largest |μ| are not always inside the window; widen the search
    // until `count` wanted pairs remain or the whole space is used.
    let n = pencil.size();
    let mut nev = window.count.min(n);
    let mut pairs = loop {
        let pairs = ritz_pairs(pencil, &op, sigma, nev, tol, opts)?;
        let inside = pairs.iter().filter(|p| window.contains(p.k)).count();
        if inside >= window.count || nev >= n || nev >= 4 * window.count {
            break pairs;
        }
        log::debug!(
            "{inside} of {} pairs inside the window with {nev} Ritz values",
            window.count
        );
        nev = (nev + window.count).min(n);
    };
    pairs.retain(|p| window.contains(p.k));
    pairs.sort_by(|p, q| {
        p.k.norm()
            .partial_cmp(&q.k.norm())
            .unwrap()
            .then(p.k.im.partial_cmp(&q.k.im).unwrap())
    });
    let mut out = Vec::new();
    for cluster in cluster_pairs(pairs) {
        out.extend(orthonormalize_cluster(cluster, &pencil.mass)?);
    }
    for p in &out {
        if p.imaginary {
            log::warn!("purely imaginary eigenvalue k = {}", p.k);
        }
    }
    Ok(out)
}

/// Converged eigenpairs for the `nev` largest |μ|, conjugates completed.
fn ritz_pairs(
    pencil: &Pencil,
    op: &dyn Fn(&[C64]) -> Vec<C64>,
    sigma: f64,
    nev: usize,
    tol: f64,
    opts: &SolverOptions,
) -> Result<Vec<EigenPair>> {
    let mut kopts = KrylovOptions::new(nev);
    kopts.max_restarts = opts.max_restarts;
    kopts.seed = opts.seed;
    kopts.tol = tol;

    let mut pairs = Vec::new();
    for attempt in 0..3 {
        let ritz = krylov_schur(pencil.size(), op, &kopts)?;
        pairs = ritz
            .into_iter()
            .map(|r| {
                let mu = r.value;
                let mut lambda = mu * sigma / (mu - 1.0);
                if lambda.im.abs() <= REAL_TOL * lambda.norm() {
                    lambda.im = 0.0;
                }
                EigenPair::from_pencil(pencil, lambda, r.vector)
            })
            .collect::<Vec<_>>();
        let worst = pairs.iter().map(|p| p.residual).fold(0.0, f64::max);
        if worst <= opts.tol {
            break;
        }
        log::debug!("attempt {attempt}: pencil residual {worst:e} above {}", opts.tol);
        kopts.tol = (kopts.tol * 1e-2).max(1e-15);
        if attempt == 2 {
            let converged = pairs.iter().filter(|p| p.residual <= opts.tol).count();
            return Err(Error::NoConvergence {
                restarts: opts.max_restarts,
                converged,
                wanted: pairs.len(),
                worst,
            });
        }
    }

    // complete conjugate pairs (A and B are real)
    let mut extra = Vec::new();
    for p in &pairs {
        if p.lambda.im != 0.0 {
            let c = p.lambda.conj();
            let present = pairs
                .iter()
                .chain(&extra)
                .any(|q: &EigenPair| (q.lambda - c).norm() <= CLUSTER_TOL * c.norm());
            if !present {
                let x: Vec<C64> = p.x.iter().map(|v| v.conj()).collect();
                extra.push(EigenPair::from_pencil(pencil, c, x));
            }
        }
    }
    pairs.extend(extra);
    Ok(pairs)
}

/// Groups consecutive (sorted) pairs whose eigenvalues agree within
/// `CLUSTER_TOL` relative.
fn cluster_pairs(pairs: Vec<EigenPair>) -> Vec<Vec<EigenPair>> {
    let mut clusters: Vec<Vec<EigenPair>> = Vec::new();
    for p in pairs {
        let joins = clusters.iter().position(|c| {
            c.iter()
                .any(|q| (q.lambda - p.lambda).norm() <= CLUSTER_TOL * p.lambda.norm().max(q.lambda.norm()))
        });
        match joins {
            Some(i) => clusters[i].push(p),
            None => clusters.push(vec![p]),
        }
    }
    clusters
}

/// Normalizes a cluster and orthonormalizes its `u₀` parts in the mass
/// inner product; numerically dependent copies are dropped.
fn orthonormalize_cluster(cluster: Vec<EigenPair>, mass: &SparseMatrix) -> Result<Vec<EigenPair>> {
    let mut kept: Vec<EigenPair> = Vec::new();
    for p in cluster {
        let mut p = normalize(&p, mass)?;
        for q in &kept {
            let mq = mass.mul_vec_complex(&q.u0);
            let c: C64 = mq.iter().zip(&p.u0).map(|(a, b)| a.conj() * b).sum();
            for (dst, src) in [(&mut p.u0, &q.u0), (&mut p.u, &q.u), (&mut p.x, &q.x)] {
                for (d, s) in dst.iter_mut().zip(src) {
                    *d -= c * s;
                }
            }
        }
        let mp = mass.mul_vec_complex(&p.u0);
        let rest: f64 = p.u0.iter().zip(&mp).map(|(a, b)| (a.conj() * b).re).sum();
        if rest.sqrt() < 1e-6 {
            log::debug!("dropping duplicate Ritz vector at λ = {}", p.lambda);
            continue;
        }
        kept.push(normalize(&p, mass)?);
    }
    let m = kept.len();
    for p in &mut kept {
        p.multiplicity = m;
    }
    Ok(kept)
}

/// Smallest Dirichlet eigenvalue of −Δ on the mesh by inverse iteration.
pub fn dirichlet_lambda1(mesh: &Mesh) -> Result<f64> {
    let part = partition_dofs(mesh);
    let (s, m) = assemble_dirichlet(mesh, &part)?;
    let lu = lu_factor(&s)?;
    let n = s.nrows();
    let mut z = vec![1.0; n];
    let mut lambda = f64::INFINITY;
    for it in 0..2000 {
        let mz = m.mul_vec(&z);
        let mut y = lu.solve(&mz);
        let my = m.mul_vec(&y);
        let sy = s.mul_vec(&y);
        let ymy: f64 = y.iter().zip(&my).map(|(a, b)| a * b).sum();
        let ysy: f64 = y.iter().zip(&sy).map(|(a, b)| a * b).sum();
        let next = ysy / ymy;
        let nrm = ymy.sqrt();
        y.iter_mut().for_each(|v| *v /= nrm);
        z = y;
        if (next - lambda).abs() <= 1e-13 * next {
            log::debug!("Dirichlet λ₁ = {next} after {it} iterations");
            return Ok(next);
        }
        lambda = next;
    }
    Err(Error::NoConvergence {
        restarts: 2000,
        converged: 0,
        wanted: 1,
        worst: f64::NAN,
    })
}

/// Lower bound for real transmission eigenvalues.
///
/// `n_star`/`n_sup` are the infimum and supremum of the index, `r` the
/// radius of a ball containing the domain, `lambda1` the first Dirichlet
/// eigenvalue and `lambda_ball` the smallest radial transmission
/// eigenvalue of the unit ball with the relevant constant index.
pub fn search_lower_bound(n_star: f64, n_sup: f64, r: f64, lambda1: f64, lambda_ball: f64) -> Result<f64> {
    if !(r > 0.0 && lambda1 > 0.0 && lambda_ball > 0.0) {
        return Err(Error::InvalidParameter(
            "radius and eigenvalue inputs must be positive".into(),
        ));
    }
    if n_star > 1.0 {
        Ok((lambda_ball / r).max((lambda1 / n_sup).sqrt()))
    } else if n_sup < 1.0 {
        Ok((lambda_ball / r).max(lambda1.sqrt()))
    } else {
        Err(Error::BoundUnavailable(format!(
            "index range [{n_star}, {n_sup}] contains 1"
        )))
    }
}
