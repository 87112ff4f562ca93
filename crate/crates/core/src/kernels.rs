//! Reproducing kernels and Gram matrices.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};

/// A reproducing kernel on ℝᵖ.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    /// `exp(-Σ_d (x_d - x'_d)² / (2σ_d²))`, one bandwidth per coordinate.
    Gaussian { bandwidths: Vec<f64> },
    /// `(xᵀx' + offset)^degree`.
    Polynomial { offset: f64, degree: u32 },
}

impl KernelSpec {
    pub fn gaussian(bandwidths: impl Into<Vec<f64>>) -> Result<Self> {
        let bandwidths = bandwidths.into();
        if bandwidths.is_empty() {
            return Err(Error::InvalidKernel("gaussian kernel needs at least one bandwidth"));
        }
        if bandwidths.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(Error::InvalidKernel("gaussian bandwidths must be positive and finite"));
        }
        Ok(KernelSpec::Gaussian { bandwidths })
    }

    pub fn polynomial(offset: f64, degree: u32) -> Result<Self> {
        if degree < 1 {
            return Err(Error::InvalidKernel("polynomial degree must be at least 1"));
        }
        if !offset.is_finite() {
            return Err(Error::InvalidKernel("polynomial offset must be finite"));
        }
        Ok(KernelSpec::Polynomial { offset, degree })
    }

    /// Fixed input dimension, if the kernel carries one.
    pub fn dim(&self) -> Option<usize> {
        match self {
            KernelSpec::Gaussian { bandwidths } => Some(bandwidths.len()),
            KernelSpec::Polynomial { .. } => None,
        }
    }

    /// Checks that states of dimension `p` are admissible for this kernel.
    pub fn check_dim(&self, p: usize) -> Result<()> {
        match self.dim() {
            Some(d) if d != p => Err(Error::DimensionMismatch { expected: d, found: p }),
            _ => Ok(()),
        }
    }

    /// Kernel value without dimension checks; callers validate first.
    #[inline]
    pub(crate) fn eval_unchecked(&self, x: &[f64], x2: &[f64]) -> f64 {
        match self {
            KernelSpec::Gaussian { bandwidths } => {
                let mut s = 0.0;
                for ((a, b), sigma) in x.iter().zip(x2).zip(bandwidths) {
                    let d = (a - b) / sigma;
                    s += d * d;
                }
                libm::exp(-0.5 * s)
            }
            KernelSpec::Polynomial { offset, degree } => {
                libm::pow(dot(x, x2) + offset, *degree as f64)
            }
        }
    }
}

/// Evaluates `κ(x, x2)`.
pub fn eval_kernel(spec: &KernelSpec, x: &[f64], x2: &[f64]) -> Result<f64> {
    if x.len() != x2.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: x2.len() });
    }
    spec.check_dim(x.len())?;
    Ok(spec.eval_unchecked(x, x2))
}

/// An ordered set of kernel centers of common dimension `p`.
///
/// Centers are stored contiguously, one after another.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dictionary {
    dim: usize,
    data: Vec<f64>,
}

impl Dictionary {
    pub fn new(dim: usize) -> Self {
        Dictionary { dim, data: Vec::new() }
    }

    pub fn from_points<P: AsRef<[f64]>>(dim: usize, points: &[P]) -> Result<Self> {
        let mut d = Dictionary::with_capacity(dim, points.len());
        for p in points {
            d.push(p.as_ref())?;
        }
        Ok(d)
    }

    pub fn with_capacity(dim: usize, n: usize) -> Self {
        Dictionary { dim, data: Vec::with_capacity(dim * n) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim.max(1))
    }

    pub fn push(&mut self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: x.len() });
        }
        self.data.extend_from_slice(x);
        Ok(())
    }

    /// New dictionary holding the centers at `idx`, in that order.
    pub fn select(&self, idx: &[usize]) -> Dictionary {
        let mut out = Dictionary::with_capacity(self.dim, idx.len());
        for &i in idx {
            out.data.extend_from_slice(self.point(i));
        }
        out
    }

    /// Copy without center `j`.
    pub fn without(&self, j: usize) -> Dictionary {
        let idx: Vec<usize> = (0..self.len()).filter(|&i| i != j).collect();
        self.select(&idx)
    }
}

/// `K[n][m] = κ(d_n, d2_m)`.
pub fn gram_matrix(spec: &KernelSpec, d: &Dictionary, d2: &Dictionary) -> Result<Matrix> {
    if !d.is_empty() && !d2.is_empty() && d.dim() != d2.dim() {
        return Err(Error::DimensionMismatch { expected: d.dim(), found: d2.dim() });
    }
    if !d.is_empty() {
        spec.check_dim(d.dim())?;
    }
    if !d2.is_empty() {
        spec.check_dim(d2.dim())?;
    }
    if core::ptr::eq(d, d2) {
        // symmetric: evaluate the upper triangle once
        let n = d.len();
        let mut k = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = spec.eval_unchecked(d.point(i), d.point(j));
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        return Ok(k);
    }
    Ok(Matrix::from_fn(d.len(), d2.len(), |i, j| spec.eval_unchecked(d.point(i), d2.point(j))))
}
