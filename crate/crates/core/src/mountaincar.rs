//! Mountain Car: dynamics, a scripted benchmark policy, trajectory datasets
//! and Monte-Carlo ground-truth returns.

use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::learner::Transition;

pub const POSITION_BOUNDS: (f64, f64) = (-1.2, 0.6);
pub const VELOCITY_BOUNDS: (f64, f64) = (-0.07, 0.07);
pub const GOAL_POSITION: f64 = 0.6;
pub const FORCE_GAIN: f64 = 0.001;
pub const GRAVITY: f64 = 0.0025;
/// Longest rollout used for a ground-truth return.
pub const ROLLOUT_CAP: usize = 10_000;

pub const LOWER: [f64; 2] = [POSITION_BOUNDS.0, VELOCITY_BOUNDS.0];
pub const UPPER: [f64; 2] = [POSITION_BOUNDS.1, VELOCITY_BOUNDS.1];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McState {
    pub position: f64,
    pub velocity: f64,
}

impl McState {
    pub fn new(position: f64, velocity: f64) -> Self {
        McState { position, velocity }
    }

    pub fn to_vec(self) -> Vec<f64> {
        alloc::vec![self.position, self.velocity]
    }

    pub fn from_slice(x: &[f64]) -> Result<Self> {
        match x {
            [p, v] => Ok(McState::new(*p, *v)),
            _ => Err(Error::DimensionMismatch { expected: 2, found: x.len() }),
        }
    }

    pub fn in_bounds(&self) -> bool {
        (POSITION_BOUNDS.0..=POSITION_BOUNDS.1).contains(&self.position)
            && (VELOCITY_BOUNDS.0..=VELOCITY_BOUNDS.1).contains(&self.velocity)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Reverse,
    Coast,
    Forward,
}

impl Action {
    pub fn force(self) -> f64 {
        match self {
            Action::Reverse => -1.0,
            Action::Coast => 0.0,
            Action::Forward => 1.0,
        }
    }

    pub fn id(self) -> usize {
        self as usize
    }

    pub fn from_id(id: usize) -> Option<Self> {
        [Action::Reverse, Action::Coast, Action::Forward].get(id).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub next: McState,
    pub reward: f64,
    pub terminal: bool,
}

/// Standard Mountain Car dynamics with the goal at the right boundary.
pub fn mc_step(s: McState, a: Action) -> StepOutcome {
    let velocity = (s.velocity + FORCE_GAIN * a.force() - GRAVITY * libm::cos(3.0 * s.position))
        .clamp(VELOCITY_BOUNDS.0, VELOCITY_BOUNDS.1);
    let position = (s.position + velocity).clamp(POSITION_BOUNDS.0, POSITION_BOUNDS.1);
    // inelastic left wall
    let velocity = if position <= POSITION_BOUNDS.0 && velocity < 0.0 { 0.0 } else { velocity };
    let terminal = position >= GOAL_POSITION;
    StepOutcome {
        next: McState { position, velocity },
        reward: if terminal { 0.0 } else { -1.0 },
        terminal,
    }
}

/// A deterministic state-feedback policy.
pub trait Policy {
    fn act(&self, s: &McState) -> Action;
    fn name(&self) -> &str;
}

/// Pushes in the direction of motion, pumping energy into the swing.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EnergyPolicy;

impl Policy for EnergyPolicy {
    fn act(&self, s: &McState) -> Action {
        energy_policy(s)
    }

    fn name(&self) -> &str {
        "energy"
    }
}

pub fn energy_policy(s: &McState) -> Action {
    if s.velocity < 0.0 {
        Action::Reverse
    } else {
        Action::Forward
    }
}

/// Episode start states: position uniform on a range, fixed velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StartDistribution {
    pub position: (f64, f64),
    pub velocity: f64,
}

impl Default for StartDistribution {
    fn default() -> Self {
        StartDistribution { position: (-0.6, -0.4), velocity: 0.0 }
    }
}

impl StartDistribution {
    pub fn sample<R: Rng>(&self, rng: &mut R) -> McState {
        let (lo, hi) = self.position;
        let position = if hi > lo { rng.random_range(lo..hi) } else { lo };
        McState { position, velocity: self.velocity }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub trajectories: Vec<Vec<Transition>>,
    pub seed: u64,
    pub policy: String,
    pub steps_per_trajectory: usize,
}

impl Dataset {
    pub fn transitions(&self) -> impl Iterator<Item = &Transition> {
        self.trajectories.iter().flatten()
    }
}

/// Runs `policy` through consecutive episodes, restarting from `start` after
/// each termination, until every trajectory has `steps` transitions.
pub fn generate_dataset(
    policy: &dyn Policy,
    n_traj: usize,
    steps: usize,
    seed: u64,
    start: &StartDistribution,
) -> Result<Dataset> {
    if n_traj == 0 || steps == 0 {
        return Err(Error::InvalidConfig("dataset needs at least one trajectory and one step"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trajectories = Vec::with_capacity(n_traj);
    for _ in 0..n_traj {
        let mut traj = Vec::with_capacity(steps);
        let mut s = start.sample(&mut rng);
        while traj.len() < steps {
            let a = policy.act(&s);
            let out = mc_step(s, a);
            traj.push(Transition {
                x: s.to_vec(),
                action: a.id(),
                y: out.next.to_vec(),
                reward: out.reward,
                terminal: out.terminal,
            });
            s = if out.terminal { start.sample(&mut rng) } else { out.next };
        }
        trajectories.push(traj);
    }
    Ok(Dataset { trajectories, seed, policy: String::from(policy.name()), steps_per_trajectory: steps })
}

/// Samples `n` distinct states from one long trajectory of `trajectory_len`
/// steps.
pub fn sample_eval_states(
    policy: &dyn Policy,
    n: usize,
    trajectory_len: usize,
    seed: u64,
    start: &StartDistribution,
) -> Result<Vec<McState>> {
    if n == 0 || n > trajectory_len {
        return Err(Error::InvalidConfig("need 1 <= eval states <= trajectory length"));
    }
    let data = generate_dataset(policy, 1, trajectory_len, seed, start)?;
    // independent stream so the sample does not depend on how many draws
    // the trajectory consumed
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut picks = index::sample(&mut rng, trajectory_len, n).into_vec();
    picks.sort_unstable();
    let traj = &data.trajectories[0];
    picks.into_iter().map(|i| McState::from_slice(&traj[i].x)).collect()
}

/// Discounted return of one deterministic rollout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTruth {
    pub value: f64,
    /// Transitions taken until termination (or the cap).
    pub steps: usize,
    /// The rollout hit [`ROLLOUT_CAP`] without terminating.
    pub capped: bool,
}

pub fn rollout_return(policy: &dyn Policy, s: McState, gamma: f64) -> GroundTruth {
    let mut state = s;
    let mut value = 0.0;
    let mut discount = 1.0;
    for k in 0..ROLLOUT_CAP {
        let out = mc_step(state, policy.act(&state));
        value += discount * out.reward;
        discount *= gamma;
        if out.terminal {
            return GroundTruth { value, steps: k + 1, capped: false };
        }
        state = out.next;
    }
    GroundTruth { value, steps: ROLLOUT_CAP, capped: true }
}

/// Monte-Carlo value of every state under a deterministic policy: one
/// rollout per state.
pub fn ground_truth(policy: &dyn Policy, states: &[McState], gamma: f64) -> Result<Vec<GroundTruth>> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidConfig("gamma must lie in (0, 1)"));
    }
    if states.iter().any(|s| !s.in_bounds()) {
        return Err(Error::InvalidConfig("evaluation state outside the state box"));
    }
    Ok(states.iter().map(|s| rollout_return(policy, *s, gamma)).collect())
}
