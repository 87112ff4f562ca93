//! Test-set error of a value estimate against Monte-Carlo ground truth.

use crate::error::{Error, Result};

/// States whose true value is smaller than this in magnitude are left out of
/// the relative error: half of one step's reward.
pub const DENOMINATOR_FLOOR: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PercentageError {
    /// Mean of `|(V(x_i) − V̂(x_i)) / V̂(x_i)|` over the retained states.
    pub value: f64,
    pub used: usize,
    pub excluded: usize,
}

/// Mean absolute relative error of `estimate` over `states`.
pub fn percentage_error<S>(
    mut estimate: impl FnMut(&S) -> f64,
    states: &[S],
    truth: &[f64],
    floor: f64,
) -> Result<PercentageError> {
    if states.len() != truth.len() {
        return Err(Error::DimensionMismatch { expected: truth.len(), found: states.len() });
    }
    let mut sum = 0.0;
    let mut used = 0;
    for (s, &t) in states.iter().zip(truth) {
        if libm::fabs(t) < floor {
            continue;
        }
        sum += libm::fabs((estimate(s) - t) / t);
        used += 1;
    }
    let excluded = states.len() - used;
    if used == 0 {
        return Err(Error::MetricUndefined { excluded });
    }
    Ok(PercentageError { value: sum / used as f64, used, excluded })
}
