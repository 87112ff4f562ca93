//! Destructive kernel orthogonal matching pursuit with pre-fitting.
//!
//! Starting from the full dictionary of a candidate function `Ṽ`, atoms are
//! removed one at a time. Each sweep scores every remaining atom `j` by
//! `γ_j`, the Hilbert-norm distance from `Ṽ` to its best approximation on
//! the dictionary without `j`; the cheapest atom is dropped (and the weights
//! refit) as long as `γ_j ≤ ε`.
//!
//! Every intermediate dictionary is a subset of `Ṽ`'s, so one Gram matrix of
//! the original dictionary serves the whole run, and residuals are measured
//! as quadratic forms of coefficient differences over that dictionary.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{solve_gram, with_jitter, Cholesky, Matrix};
use crate::rkhs::RkhsFunction;

/// Removal errors closer than this are ties; the lower index wins.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CompressionResult {
    pub function: RkhsFunction,
    pub removed_count: usize,
    /// `‖function − input‖_H`.
    pub final_error: f64,
}

/// Precomputed Gram data for one candidate function.
struct Workspace<'a> {
    source: &'a RkhsFunction,
    gram: Matrix,
    /// `K w̃`, i.e. `Ṽ(d_i)` at every original center.
    projections: Vec<f64>,
    /// `‖Ṽ‖²_H`.
    norm_sq: f64,
}

impl<'a> Workspace<'a> {
    fn new(source: &'a RkhsFunction) -> Self {
        let gram = source.gram();
        let projections = gram.mul_vec(source.coeffs());
        let norm_sq = crate::linalg::dot(source.coeffs(), &projections);
        Workspace { source, gram, projections, norm_sq }
    }

    /// Best weights over the original centers `keep` and the resulting
    /// residual norm `‖Ṽ − Σ_{k∈keep} w_k κ(d_k,·)‖_H`.
    fn fit(&self, keep: &[usize]) -> Result<(Vec<f64>, f64)> {
        if keep.is_empty() {
            return Ok((Vec::new(), self.full_norm()));
        }
        let k = self.gram.principal(keep);
        let w = solve_gram(&k, &self.rhs(keep))?;
        Ok(self.with_residual(keep, w))
    }

    /// Scores every single-atom removal from `active`.
    ///
    /// One jittered factor of the active Gram block is downdated per
    /// candidate; if it cannot be formed each candidate is solved on its own.
    fn sweep(&self, active: &[usize]) -> Result<Vec<(Vec<f64>, f64)>> {
        if active.len() == 1 {
            return Ok(alloc::vec![(Vec::new(), self.full_norm())]);
        }
        let k_active = self.gram.principal(active);
        let Some(chol) = Cholesky::factor(&with_jitter(&k_active)) else {
            return (0..active.len()).map(|pos| self.fit(&all_but(active, pos))).collect();
        };
        (0..active.len())
            .map(|pos| {
                let keep = all_but(active, pos);
                let w = chol.delete(pos).solve_refined(&self.gram.principal(&keep), &self.rhs(&keep));
                if w.iter().all(|v| v.is_finite()) {
                    Ok(self.with_residual(&keep, w))
                } else {
                    self.fit(&keep)
                }
            })
            .collect()
    }

    fn full_norm(&self) -> f64 {
        libm::sqrt(self.norm_sq.max(0.0))
    }

    fn rhs(&self, keep: &[usize]) -> Vec<f64> {
        keep.iter().map(|&i| self.projections[i]).collect()
    }

    fn with_residual(&self, keep: &[usize], w: Vec<f64>) -> (Vec<f64>, f64) {
        let mut residual = self.source.coeffs().to_vec();
        for (&i, wi) in keep.iter().zip(&w) {
            residual[i] -= wi;
        }
        let err_sq = self.gram.quadratic_form(&residual, &residual);
        (w, libm::sqrt(err_sq.max(0.0)))
    }
}

fn all_but(active: &[usize], skip: usize) -> Vec<usize> {
    active.iter().enumerate().filter(|&(p, _)| p != skip).map(|(_, &i)| i).collect()
}

/// `γ_j`: the smallest Hilbert-norm error achievable after dropping atom
/// `j` and refitting the remaining weights. With a single atom this is
/// `‖Ṽ‖_H`.
pub fn removal_error(v: &RkhsFunction, j: usize) -> Result<f64> {
    let m = v.model_order();
    if j >= m {
        return Err(Error::IndexOutOfRange { index: j, len: m });
    }
    let ws = Workspace::new(v);
    let active: Vec<usize> = (0..m).collect();
    Ok(ws.fit(&all_but(&active, j))?.1)
}

/// Greedily prunes `v` while the approximation error stays within `eps`.
pub fn compress(v: &RkhsFunction, eps: f64) -> Result<CompressionResult> {
    if !(eps >= 0.0) {
        return Err(Error::InvalidConfig("compression budget must be non-negative"));
    }
    if v.is_empty() {
        return Ok(CompressionResult { function: v.clone(), removed_count: 0, final_error: 0.0 });
    }
    let ws = Workspace::new(v);
    let mut active: Vec<usize> = (0..v.model_order()).collect();
    let mut weights: Vec<f64> = v.coeffs().to_vec();
    let mut error = 0.0;

    while !active.is_empty() {
        let mut best: Option<(usize, f64, Vec<f64>)> = None;
        for (pos, (w, gamma)) in ws.sweep(&active)?.into_iter().enumerate() {
            let better = match &best {
                None => true,
                Some((_, g, _)) => gamma < *g - TIE_TOLERANCE,
            };
            if better {
                best = Some((pos, gamma, w));
            }
        }
        let (pos, gamma, w) = best.expect("active set is non-empty");
        if gamma > eps {
            break;
        }
        active.remove(pos);
        weights = w;
        error = gamma;
    }

    let removed_count = v.model_order() - active.len();
    let dict = v.dictionary().select(&active);
    let function = RkhsFunction::new(v.spec().clone(), dict, weights)?;
    Ok(CompressionResult { function, removed_count, final_error: error })
}
