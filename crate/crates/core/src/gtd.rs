//! Linear gradient-TD baseline on a fixed grid of Gaussian RBF features.
//!
//! The update is the two-time-scale TDC rule: `θ` follows the corrected TD
//! direction, `w` tracks the projection of `δ` onto the features.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::kernels::{Dictionary, KernelSpec};
use crate::learner::Transition;
use crate::linalg::dot;

/// RBF centers on a regular grid anchored at the lower state bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct RbfGrid {
    centers: Dictionary,
    kernel: KernelSpec,
    /// Points per dimension.
    shape: Vec<usize>,
}

impl RbfGrid {
    /// Places centers at `lower_d + i·h_d` for `i = 0..=floor((upper_d − lower_d)/h_d)`.
    pub fn new(lower: &[f64], upper: &[f64], spacing: &[f64], bandwidths: &[f64]) -> Result<Self> {
        let p = lower.len();
        for len in [upper.len(), spacing.len(), bandwidths.len()] {
            if len != p {
                return Err(Error::DimensionMismatch { expected: p, found: len });
            }
        }
        if p == 0 {
            return Err(Error::InvalidConfig("grid needs at least one dimension"));
        }
        let mut axes: Vec<Vec<f64>> = Vec::with_capacity(p);
        for d in 0..p {
            let span = upper[d] - lower[d];
            if !(span >= 0.0) || !(spacing[d] > 0.0) {
                return Err(Error::InvalidConfig("grid bounds or spacing invalid"));
            }
            // tolerate spans that are an exact multiple of h up to rounding
            let n = libm::floor(span / spacing[d] + 1e-9) as usize + 1;
            axes.push((0..n).map(|i| lower[d] + i as f64 * spacing[d]).collect());
        }
        let shape: Vec<usize> = axes.iter().map(Vec::len).collect();
        let total: usize = shape.iter().product();
        let mut centers = Dictionary::with_capacity(p, total);
        let mut idx = vec![0usize; p];
        let mut point = vec![0.0; p];
        for _ in 0..total {
            for d in 0..p {
                point[d] = axes[d][idx[d]];
            }
            centers.push(&point)?;
            // odometer, first dimension slowest
            for d in (0..p).rev() {
                idx[d] += 1;
                if idx[d] < shape[d] {
                    break;
                }
                idx[d] = 0;
            }
        }
        let kernel = KernelSpec::gaussian(bandwidths.to_vec())?;
        Ok(RbfGrid { centers, kernel, shape })
    }

    /// Number of features `K`.
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn centers(&self) -> &Dictionary {
        &self.centers
    }

    pub fn center(&self, k: usize) -> &[f64] {
        self.centers.point(k)
    }

    /// `φ_k(x) = κ(x, c_k)`, unnormalized.
    pub fn features(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.centers.dim() {
            return Err(Error::DimensionMismatch { expected: self.centers.dim(), found: x.len() });
        }
        Ok(self.centers.points().map(|c| self.kernel.eval_unchecked(c, x)).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GtdState {
    pub theta: Vec<f64>,
    pub w_aux: Vec<f64>,
}

impl GtdState {
    pub fn zeros(k: usize) -> Self {
        GtdState { theta: vec![0.0; k], w_aux: vec![0.0; k] }
    }
}

/// `θᵀφ(x)`.
pub fn gtd_value(st: &GtdState, grid: &RbfGrid, x: &[f64]) -> Result<f64> {
    Ok(dot(&st.theta, &grid.features(x)?))
}

/// One TDC update:
///
/// ```text
/// δ = r + γ θᵀφ(y) − θᵀφ(x)
/// θ ← θ + α [δ φ(x) − γ (wᵀφ(x)) φ(y)]
/// w ← w + β [δ − wᵀφ(x)] φ(x)
/// ```
///
/// A terminal `y` has no successor features: `φ(y)` is taken as zero.
pub fn gtd_step(
    st: &GtdState,
    grid: &RbfGrid,
    s: &Transition,
    alpha: f64,
    beta: f64,
    gamma: f64,
) -> Result<GtdState> {
    if st.theta.len() != grid.len() || st.w_aux.len() != grid.len() {
        return Err(Error::DimensionMismatch { expected: grid.len(), found: st.theta.len() });
    }
    let phi_x = grid.features(&s.x)?;
    let phi_y = if s.terminal { vec![0.0; grid.len()] } else { grid.features(&s.y)? };
    let delta = s.reward + gamma * dot(&st.theta, &phi_y) - dot(&st.theta, &phi_x);
    let w_phi = dot(&st.w_aux, &phi_x);
    let theta = st
        .theta
        .iter()
        .zip(phi_x.iter().zip(&phi_y))
        .map(|(t, (fx, fy))| t + alpha * (delta * fx - gamma * w_phi * fy))
        .collect();
    let w_aux = st.w_aux.iter().zip(&phi_x).map(|(w, fx)| w + beta * (delta - w_phi) * fx).collect();
    Ok(GtdState { theta, w_aux })
}
