//! Sparse LU factorization (fill-reducing ordering, partial pivoting).

use faer::prelude::*;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

use crate::sparse::SparseMatrix;
use crate::{Error, Result, C64};

/// Residual above which a factorization is treated as singular.
const SINGULAR_RESIDUAL: f64 = 1e-6;

pub struct Factorization {
    n: usize,
    lu: Lu<usize, f64>,
}

impl std::fmt::Debug for Factorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Factorization").field("n", &self.n).finish()
    }
}

/// Factors `m`, then probes the factors with a fixed right-hand side: a
/// zero or tiny pivot shows up as a non-finite or inaccurate solve.
pub fn lu_factor(m: &SparseMatrix) -> Result<Factorization> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "cannot factor a {}×{} matrix",
            n,
            m.ncols()
        )));
    }
    let triplets: Vec<_> = m
        .triplets()
        .into_iter()
        .map(|(r, c, v)| Triplet::new(r, c, v))
        .collect();
    let csc = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| Error::DimensionMismatch(format!("{e:?}")))?;
    let lu = csc.sp_lu().map_err(|e| Error::SingularMatrix(format!("{e:?}")))?;
    let fact = Factorization { n, lu };

    let probe: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 7919) % 17) as f64 / 17.0).collect();
    let z = fact.solve(&probe);
    let r = m.mul_vec(&z);
    let res = norm(&r.iter().zip(&probe).map(|(a, b)| a - b).collect::<Vec<_>>()) / norm(&probe);
    if !res.is_finite() || res > SINGULAR_RESIDUAL {
        return Err(Error::SingularMatrix(format!("probe residual {res:e}")));
    }
    Ok(fact)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl Factorization {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let rhs = Mat::<f64>::from_fn(self.n, 1, |i, _| b[i]);
        let x = self.lu.solve(&rhs);
        (0..self.n).map(|i| x[(i, 0)]).collect()
    }

    /// Solves with a complex right-hand side (real and imaginary parts
    /// together as two columns).
    pub fn solve_complex(&self, b: &[C64]) -> Vec<C64> {
        assert_eq!(b.len(), self.n);
        let rhs = Mat::<f64>::from_fn(self.n, 2, |i, j| if j == 0 { b[i].re } else { b[i].im });
        let x = self.lu.solve(&rhs);
        (0..self.n).map(|i| C64::new(x[(i, 0)], x[(i, 1)])).collect()
    }
}
