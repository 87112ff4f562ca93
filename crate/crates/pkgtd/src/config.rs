//! Experiment configuration: a flat `key = value` file, overridden by
//! command-line flags.
//!
//! Keys use the flag names with `-` or `_` interchangeably (`n-traj`,
//! `n_traj`). Lines starting with `#` are comments. Learner step sizes left
//! unset take the defaults of the chosen method.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use pkgtd_core::gtd::RbfGrid;
use pkgtd_core::mountaincar::{LOWER, UPPER};
use pkgtd_core::{KernelSpec, LearnerConfig, Schedule};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config line {line}: expected key = value")]
    Syntax { line: usize },
    #[error("unknown config key {0:?}")]
    UnknownKey(String),
    #[error("bad value {value:?} for {key}: {msg}")]
    Value { key: String, value: String, msg: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Pkgtd,
    GtdRbf,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Pkgtd => "pkgtd",
            Method::GtdRbf => "gtd-rbf",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "pkgtd" => Ok(Method::Pkgtd),
            "gtd-rbf" | "gtd" | "rbf" => Ok(Method::GtdRbf),
            _ => Err(String::from("expected pkgtd or gtd-rbf")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleKind {
    Constant,
    Diminishing,
}

impl FromStr for ScheduleKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "constant" => Ok(ScheduleKind::Constant),
            "diminishing" => Ok(ScheduleKind::Diminishing),
            _ => Err(String::from("expected constant or diminishing")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub method: Method,
    /// Transitions per trajectory.
    pub steps: usize,
    pub n_traj: usize,
    /// Dataset seed.
    pub seed: u64,
    /// Load transitions from this file instead of generating them.
    pub dataset: Option<PathBuf>,
    pub gamma: f64,
    pub lambda: f64,
    /// Constant step size, or `α₀` of the diminishing schedule.
    pub alpha: f64,
    /// Constant averaging rate, or `β₀` of the diminishing schedule.
    pub beta: f64,
    /// Compression budget for the constant schedule.
    pub eps: f64,
    pub schedule: ScheduleKind,
    pub zeta: f64,
    /// `ε_t = eps_scale · α_t²` under the diminishing schedule.
    pub eps_scale: f64,
    /// Gaussian kernel bandwidths, shared by both methods.
    pub sigma: [f64; 2],
    /// RBF grid spacing.
    pub grid_h: [f64; 2],
    /// Evaluate every this many steps (and after the last).
    pub cadence: usize,
    pub eval_states: usize,
    pub eval_seed: u64,
    /// Length of the trajectory the evaluation states are drawn from.
    pub eval_len: usize,
    pub out: Option<PathBuf>,
    /// Write the final learner state of every trajectory here.
    pub checkpoint: Option<PathBuf>,
    /// Record wall time as zero so repeated runs give identical bytes.
    pub deterministic: bool,
}

impl ExperimentConfig {
    /// Defaults for `method` under the constant schedule.
    pub fn new(method: Method) -> Self {
        let (alpha, beta) = match method {
            Method::Pkgtd => (8.0, 0.2),
            Method::GtdRbf => (10.0, 0.25),
        };
        ExperimentConfig {
            method,
            steps: 2000,
            n_traj: 10,
            seed: 1,
            dataset: None,
            gamma: 0.99,
            lambda: 1e-6,
            alpha,
            beta,
            eps: 0.02,
            schedule: ScheduleKind::Constant,
            zeta: 0.1,
            eps_scale: 1.0,
            sigma: [0.2, 0.0156],
            grid_h: [0.44, 0.0343],
            cadence: 100,
            eval_states: 200,
            eval_seed: 1000,
            eval_len: 10_000,
            out: None,
            checkpoint: None,
            deterministic: false,
        }
    }

    /// Builds a config from `key = value` pairs; later pairs win.
    pub fn from_pairs<K, V>(pairs: impl IntoIterator<Item = (K, V)>) -> Result<Self, ConfigError>
    where
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let mut map = BTreeMap::new();
        for (k, v) in pairs {
            map.insert(k.as_ref().trim().replace('-', "_"), v.as_ref().trim().to_owned());
        }
        let method = match map.remove("method") {
            Some(v) => parse_value("method", &v)?,
            None => Method::Pkgtd,
        };
        let schedule: ScheduleKind = match map.get("schedule") {
            Some(v) => parse_value("schedule", v)?,
            None => ScheduleKind::Constant,
        };
        let mut cfg = ExperimentConfig::new(method);
        if schedule == ScheduleKind::Diminishing {
            cfg.beta = 1.0;
        }
        for (key, value) in &map {
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file, then applies `overrides` on top of it.
    pub fn load(path: &Path, overrides: &[(String, String)]) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.to_owned(), source })?;
        let mut pairs = parse_pairs(&text)?;
        pairs.extend(overrides.iter().cloned());
        Self::from_pairs(pairs)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let path = || Some(PathBuf::from(value));
        match key {
            "steps" => self.steps = parse_value(key, value)?,
            "n_traj" => self.n_traj = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "dataset" => self.dataset = path(),
            "gamma" => self.gamma = parse_value(key, value)?,
            "lambda" => self.lambda = parse_value(key, value)?,
            "alpha" => self.alpha = parse_value(key, value)?,
            "beta" => self.beta = parse_value(key, value)?,
            "eps" => self.eps = parse_value(key, value)?,
            "schedule" => self.schedule = parse_value(key, value)?,
            "zeta" => self.zeta = parse_value(key, value)?,
            "eps_scale" => self.eps_scale = parse_value(key, value)?,
            "sigma1" => self.sigma[0] = parse_value(key, value)?,
            "sigma2" => self.sigma[1] = parse_value(key, value)?,
            "grid_h1" => self.grid_h[0] = parse_value(key, value)?,
            "grid_h2" => self.grid_h[1] = parse_value(key, value)?,
            "cadence" => self.cadence = parse_value(key, value)?,
            "eval_states" => self.eval_states = parse_value(key, value)?,
            "eval_seed" => self.eval_seed = parse_value(key, value)?,
            "eval_len" => self.eval_len = parse_value(key, value)?,
            "out" => self.out = path(),
            "checkpoint" => self.checkpoint = path(),
            "deterministic" => self.deterministic = parse_value(key, value)?,
            _ => return Err(ConfigError::UnknownKey(key.to_owned())),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |msg: &str| Err(ConfigError::Invalid(msg.to_owned()));
        if self.cadence == 0 {
            return invalid("cadence must be at least 1");
        }
        if self.eval_states == 0 || self.eval_states > self.eval_len {
            return invalid("eval_states must lie in 1..=eval_len");
        }
        if self.dataset.is_none() && (self.steps == 0 || self.n_traj == 0) {
            return invalid("steps and n_traj must be at least 1");
        }
        self.kernel().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        match self.method {
            Method::Pkgtd => self.learner().validate().map_err(|e| ConfigError::Invalid(e.to_string()))?,
            Method::GtdRbf => {
                if !(self.gamma > 0.0 && self.gamma < 1.0) {
                    return invalid("gamma must lie in (0, 1)");
                }
                if !(self.alpha > 0.0 && self.beta > 0.0) {
                    return invalid("alpha and beta must be positive");
                }
                if self.schedule != ScheduleKind::Constant {
                    return invalid("gtd-rbf supports only the constant schedule");
                }
                if self.checkpoint.is_some() {
                    return invalid("checkpoints are written for pkgtd only");
                }
                self.grid().map_err(|e| ConfigError::Invalid(e.to_string()))?;
            }
        }
        Ok(())
    }

    pub fn kernel(&self) -> pkgtd_core::Result<KernelSpec> {
        KernelSpec::gaussian(self.sigma.to_vec())
    }

    pub fn learner(&self) -> LearnerConfig {
        let schedule = match self.schedule {
            ScheduleKind::Constant => Schedule::Constant { alpha: self.alpha, beta: self.beta, eps: self.eps },
            ScheduleKind::Diminishing => Schedule::Diminishing {
                zeta: self.zeta,
                alpha0: self.alpha,
                beta0: self.beta,
                eps_scale: self.eps_scale,
            },
        };
        LearnerConfig { gamma: self.gamma, lambda: self.lambda, schedule }
    }

    pub fn grid(&self) -> pkgtd_core::Result<RbfGrid> {
        RbfGrid::new(&LOWER, &UPPER, &self.grid_h, &self.sigma)
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value.parse().map_err(|e: T::Err| ConfigError::Value {
        key: key.to_owned(),
        value: value.to_owned(),
        msg: e.to_string(),
    })
}

/// Splits a config file into `(key, value)` pairs, skipping blanks and comments.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
        pairs.push((k.trim().to_owned(), v.trim().to_owned()));
    }
    Ok(pairs)
}
