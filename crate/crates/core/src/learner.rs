//! The parsimonious kernel GTD learner.
//!
//! Each step computes the temporal difference of the current value function,
//! folds it into the auxiliary average `z`, takes a functional
//! quasi-gradient step that appends the two visited states to the
//! dictionary, and compresses the result back within budget `ε_t` with
//! [`compress`](crate::komp::compress).

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::komp::compress;
use crate::rkhs::{hilbert_distance, RkhsFunction};

/// One sampled transition `(x, a, y, r)` of the evaluated policy.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub x: Vec<f64>,
    pub action: usize,
    pub y: Vec<f64>,
    pub reward: f64,
    /// `y` ended the episode; its value is not bootstrapped.
    pub terminal: bool,
}

/// Step sizes in effect at one iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSizes {
    pub alpha: f64,
    pub beta: f64,
    pub eps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Schedule {
    /// Fixed `α`, `β` and compression budget `ε`.
    Constant { alpha: f64, beta: f64, eps: f64 },
    /// `α_t = α₀ t^{-(3/4+ζ/2)}`, `β_t = β₀ t^{-(1+ζ)/2}`, `ε_t = c α_t²`,
    /// with `t` counted from 1.
    Diminishing { zeta: f64, alpha0: f64, beta0: f64, eps_scale: f64 },
}

impl Schedule {
    /// Rates for the zero-based iteration `t`.
    pub fn at(&self, t: u64) -> StepSizes {
        match *self {
            Schedule::Constant { alpha, beta, eps } => StepSizes { alpha, beta, eps },
            Schedule::Diminishing { zeta, alpha0, beta0, eps_scale } => {
                let n = (t + 1) as f64;
                let alpha = alpha0 * libm::pow(n, -(0.75 + zeta / 2.0));
                let beta = beta0 * libm::pow(n, -(1.0 + zeta) / 2.0);
                StepSizes { alpha, beta, eps: eps_scale * alpha * alpha }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Schedule::Constant { alpha, beta, eps } => {
                if !(alpha > 0.0 && alpha.is_finite()) {
                    return Err(Error::InvalidConfig("alpha must be positive"));
                }
                if !(beta > 0.0 && beta < 1.0) {
                    return Err(Error::InvalidConfig("beta must lie in (0, 1)"));
                }
                if !(eps >= 0.0) {
                    return Err(Error::InvalidConfig("eps must be non-negative"));
                }
            }
            Schedule::Diminishing { zeta, alpha0, beta0, eps_scale } => {
                if !(zeta > 0.0 && zeta.is_finite()) {
                    return Err(Error::InvalidConfig("zeta must be positive"));
                }
                if !(alpha0 > 0.0 && alpha0.is_finite()) {
                    return Err(Error::InvalidConfig("alpha0 must be positive"));
                }
                if !(beta0 > 0.0 && beta0 <= 1.0) {
                    return Err(Error::InvalidConfig("beta0 must lie in (0, 1]"));
                }
                if !(eps_scale >= 0.0) {
                    return Err(Error::InvalidConfig("eps_scale must be non-negative"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnerConfig {
    /// Discount factor, in (0, 1).
    pub gamma: f64,
    /// Hilbert-norm regularizer, ≥ 0.
    pub lambda: f64,
    pub schedule: Schedule,
}

impl LearnerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::InvalidConfig("gamma must lie in (0, 1)"));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidConfig("lambda must be non-negative"));
        }
        self.schedule.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnerState {
    pub value: RkhsFunction,
    /// Running average of temporal differences.
    pub z: f64,
    /// Number of completed steps.
    pub t: u64,
}

impl LearnerState {
    /// Null initialization: empty dictionary, `z = 0`, `t = 0`.
    pub fn new(spec: KernelSpec, dim: usize) -> Result<Self> {
        Ok(LearnerState { value: RkhsFunction::zero(spec, dim)?, z: 0.0, t: 0 })
    }
}

/// Everything one step produced, handed to an [`Observer`].
#[derive(Debug)]
pub struct StepRecord<'a> {
    /// Iteration index the step consumed (zero-based).
    pub t: u64,
    pub rates: StepSizes,
    pub delta: f64,
    pub z: f64,
    /// `V_t(x_t)` and `V_t(y_t)` before the update.
    pub value_x: f64,
    pub value_y: f64,
    /// Uncompressed iterate `Ṽ_{t+1}`.
    pub candidate: &'a RkhsFunction,
    /// Compressed iterate `V_{t+1}`.
    pub compressed: &'a RkhsFunction,
    /// `‖Ṽ_{t+1} − V_{t+1}‖_H` as reported by the compressor.
    pub compression_error: f64,
}

/// Hooks into a learner run. All methods default to no-ops.
pub trait Observer {
    fn on_step(&mut self, _record: &StepRecord<'_>) {}

    /// Run `on_checkpoint` every this many steps (and after the last step).
    fn cadence(&self) -> Option<usize> {
        None
    }

    fn on_checkpoint(&mut self, _state: &LearnerState) {}
}

impl Observer for () {}

/// `δ = r + γ V(y) − V(x)`; the bootstrap term is dropped on terminal steps.
pub fn temporal_difference(v: &RkhsFunction, s: &Transition, gamma: f64) -> Result<f64> {
    let vx = v.evaluate(&s.x)?;
    let vy = if s.terminal { 0.0 } else { v.evaluate(&s.y)? };
    Ok(s.reward + gamma * vy - vx)
}

/// `z ← (1 − β) z + β δ`.
pub fn update_auxiliary(z: f64, delta: f64, beta: f64) -> f64 {
    (1.0 - beta) * z + beta * delta
}

/// Unprojected functional quasi-gradient step
/// `Ṽ = (1 − αλ) V − α (γ κ(y,·) − κ(x,·)) z`.
///
/// The dictionary grows by `[x, y]` with weights `[α z, −α γ z]`.
pub fn sqg_step(
    v: &RkhsFunction,
    s: &Transition,
    z_next: f64,
    alpha: f64,
    lambda: f64,
    gamma: f64,
) -> Result<RkhsFunction> {
    let mut out = v.clone();
    out.scale(1.0 - alpha * lambda);
    out.push_atom(&s.x, alpha * z_next)?;
    out.push_atom(&s.y, -alpha * gamma * z_next)?;
    Ok(out)
}

/// Realized deviation between the projected and unprojected quasi-gradients,
/// `‖Ṽ − V‖_H / α`.
pub fn quasi_gradient_deviation(
    candidate: &RkhsFunction,
    compressed: &RkhsFunction,
    alpha: f64,
) -> Result<f64> {
    Ok(hilbert_distance(candidate, compressed)? / alpha)
}

/// One iteration; the state is left untouched on error.
pub fn pkgtd_step_observed(
    state: &mut LearnerState,
    s: &Transition,
    cfg: &LearnerConfig,
    observer: &mut dyn Observer,
) -> Result<()> {
    let rates = cfg.schedule.at(state.t);
    let value_x = state.value.evaluate(&s.x)?;
    let value_y = if s.terminal { 0.0 } else { state.value.evaluate(&s.y)? };
    let delta = s.reward + cfg.gamma * value_y - value_x;
    let z = update_auxiliary(state.z, delta, rates.beta);
    // A terminal next state carries no bootstrapped value, so its kernel
    // section drops out of the quasi-gradient.
    let gamma = if s.terminal { 0.0 } else { cfg.gamma };
    let candidate = sqg_step(&state.value, s, z, rates.alpha, cfg.lambda, gamma)?;
    let compressed = compress(&candidate, rates.eps)?;
    observer.on_step(&StepRecord {
        t: state.t,
        rates,
        delta,
        z,
        value_x,
        value_y,
        candidate: &candidate,
        compressed: &compressed.function,
        compression_error: compressed.final_error,
    });
    state.value = compressed.function;
    state.z = z;
    state.t += 1;
    Ok(())
}

pub fn pkgtd_step(mut state: LearnerState, s: &Transition, cfg: &LearnerConfig) -> Result<LearnerState> {
    pkgtd_step_observed(&mut state, s, cfg, &mut ())?;
    Ok(state)
}

/// A run that stopped early. `state` is the last successfully computed
/// state, or `None` when the run could not start.
#[derive(Debug, Clone, PartialEq)]
pub struct RunError {
    pub state: Option<Box<LearnerState>>,
    pub error: Error,
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.state {
            Some(st) => write!(f, "learner stopped after step {}: {}", st.t, self.error),
            None => write!(f, "learner could not start: {}", self.error),
        }
    }
}

impl core::error::Error for RunError {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        Some(&self.error)
    }
}

/// Folds [`pkgtd_step`] over `dataset` in order, starting from the null
/// function.
pub fn run(
    spec: KernelSpec,
    dataset: &[Transition],
    cfg: &LearnerConfig,
    observer: &mut dyn Observer,
) -> core::result::Result<LearnerState, RunError> {
    let not_started = |error| RunError { state: None, error };
    let first = dataset.first().ok_or_else(|| not_started(Error::InvalidConfig("dataset is empty")))?;
    cfg.validate().map_err(not_started)?;
    let mut state = LearnerState::new(spec, first.x.len()).map_err(not_started)?;
    let cadence = observer.cadence().map(|k| k.max(1));
    for (i, s) in dataset.iter().enumerate() {
        if let Err(error) = pkgtd_step_observed(&mut state, s, cfg, observer) {
            return Err(RunError { state: Some(Box::new(state)), error });
        }
        if let Some(k) = cadence {
            if (i + 1) % k == 0 || i + 1 == dataset.len() {
                observer.on_checkpoint(&state);
            }
        }
    }
    Ok(state)
}
