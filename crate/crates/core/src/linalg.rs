//! Small dense linear algebra for Gram systems.
//!
//! Dictionaries stay small, so everything here is a direct O(n³) routine on
//! row-major storage. The only entry point the rest of the crate needs is
//! [`solve_gram`], which solves `K x = b` for a symmetric positive
//! semidefinite `K`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Relative diagonal jitter: `JITTER * trace(K) / n` is added before factoring.
pub const JITTER: f64 = 1e-10;

/// Iterative-refinement passes against the unjittered matrix.
const REFINEMENT_STEPS: usize = 2;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// `self * v`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `u^T self v`.
    pub fn quadratic_form(&self, u: &[f64], v: &[f64]) -> f64 {
        debug_assert_eq!(u.len(), self.rows);
        (0..self.rows).map(|i| u[i] * dot(self.row(i), v)).sum()
    }

    /// Principal submatrix on `idx` (rows and columns).
    pub fn principal(&self, idx: &[usize]) -> Matrix {
        Matrix::from_fn(idx.len(), idx.len(), |i, j| self[(idx[i], idx[j])])
    }
}

impl core::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Lower Cholesky factor of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    /// Returns `None` when a pivot is not strictly positive and finite.
    pub fn factor(a: &Matrix) -> Option<Self> {
        let n = a.rows;
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > 0.0) || !d.is_finite() {
                return None;
            }
            let d = libm::sqrt(d);
            l[(j, j)] = d;
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / d;
            }
        }
        Some(Cholesky { l })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.l.rows;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[(i, k)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= self.l[(k, i)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
        y
    }

    /// Factor of `A` with row and column `j` deleted, by Givens rotations on
    /// the trailing block: O((n − j)·n) instead of a fresh O(n³) factor.
    pub fn delete(&self, j: usize) -> Cholesky {
        let n = self.l.rows;
        assert!(j < n, "deleted index out of range");
        // rows of L without row j; row i ≥ j of `r` spills one column past
        // the diagonal
        let mut r = Matrix::from_fn(n - 1, n, |i, k| {
            let src = if i < j { i } else { i + 1 };
            self.l[(src, k)]
        });
        for k in j..n - 1 {
            let a = r[(k, k)];
            let b = r[(k, k + 1)];
            let h = libm::hypot(a, b);
            if h == 0.0 {
                continue;
            }
            let (c, s) = (a / h, b / h);
            for i in k..n - 1 {
                let x = r[(i, k)];
                let y = r[(i, k + 1)];
                r[(i, k)] = c * x + s * y;
                r[(i, k + 1)] = -s * x + c * y;
            }
        }
        let l = Matrix::from_fn(n - 1, n - 1, |i, k| if k <= i { r[(i, k)] } else { 0.0 });
        Cholesky { l }
    }

    /// Solves `A x = b` where this factors `A + τI`, refining against `a`.
    pub fn solve_refined(&self, a: &Matrix, b: &[f64]) -> Vec<f64> {
        let mut x = self.solve(b);
        for _ in 0..REFINEMENT_STEPS {
            let ax = a.mul_vec(&x);
            let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
            let dx = self.solve(&r);
            for (xi, di) in x.iter_mut().zip(&dx) {
                *xi += di;
            }
        }
        x
    }

    /// Squared ratio of the extreme pivots; a cheap lower bound on cond(A).
    pub fn condition_estimate(&self) -> f64 {
        let n = self.l.rows;
        if n == 0 {
            return 1.0;
        }
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            let d = self.l[(i, i)];
            lo = lo.min(d);
            hi = hi.max(d);
        }
        (hi / lo) * (hi / lo)
    }
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns `(eigenvalues, eigenvectors)`; column `k` of the second matrix
/// is the eigenvector for eigenvalue `k`.
pub fn symmetric_eigen(a: &Matrix) -> (Vec<f64>, Matrix) {
    let n = a.rows;
    let mut m = a.clone();
    let mut v = Matrix::identity(n);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += m[(i, j)] * m[(i, j)];
            }
        }
        let scale: f64 = (0..n).map(|i| m[(i, i)] * m[(i, i)]).sum();
        if off <= 1e-30 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (libm::fabs(theta) + libm::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| m[(i, i)]).collect(), v)
}

/// Solves `K x = b` for symmetric positive semidefinite `K`.
///
/// The system actually factored is `K + τI` with `τ = JITTER·trace(K)/n`;
/// the result is then polished by iterative refinement against `K` itself,
/// which removes the jitter bias along well-conditioned directions and
/// leaves (numerically) null directions regularized. If Cholesky fails the
/// solve falls back to an eigenvalue pseudo-inverse.
pub fn solve_gram(k: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    assert!(k.is_square() && k.rows == b.len(), "gram system shape");
    let n = k.rows;
    if n == 0 {
        return Ok(Vec::new());
    }
    if k.data.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::SolverFailure { condition: f64::INFINITY });
    }
    let jittered = with_jitter(k);
    let x = match Cholesky::factor(&jittered) {
        Some(chol) => chol.solve_refined(k, b),
        None => pseudo_inverse_solve(&jittered, b)?,
    };
    if x.iter().all(|v| v.is_finite()) {
        Ok(x)
    } else {
        let (vals, _) = symmetric_eigen(&jittered);
        Err(Error::SolverFailure { condition: condition_from_eigenvalues(&vals) })
    }
}

/// `K + τI` with `τ = JITTER·trace(K)/n`.
pub fn with_jitter(k: &Matrix) -> Matrix {
    let n = k.rows;
    let tau = if n == 0 { 0.0 } else { JITTER * libm::fabs(k.trace()) / n as f64 };
    let mut j = k.clone();
    for i in 0..n {
        j[(i, i)] += tau;
    }
    j
}

fn condition_from_eigenvalues(vals: &[f64]) -> f64 {
    let hi = vals.iter().fold(0.0f64, |a, v| a.max(libm::fabs(*v)));
    let lo = vals.iter().fold(f64::INFINITY, |a, v| a.min(libm::fabs(*v)));
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

fn pseudo_inverse_solve(k: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = k.rows;
    let (vals, vecs) = symmetric_eigen(k);
    let hi = vals.iter().fold(0.0f64, |a, v| a.max(libm::fabs(*v)));
    if !(hi > 0.0) || !hi.is_finite() {
        return Err(Error::SolverFailure { condition: condition_from_eigenvalues(&vals) });
    }
    let cutoff = hi * n as f64 * f64::EPSILON;
    let mut x = vec![0.0; n];
    for (e, &lambda) in vals.iter().enumerate() {
        if lambda <= cutoff {
            continue;
        }
        let coef = (0..n).map(|i| vecs[(i, e)] * b[i]).sum::<f64>() / lambda;
        for i in 0..n {
            x[i] += coef * vecs[(i, e)];
        }
    }
    Ok(x)
}
