//! Experiment driver: dataset and ground truth, one learner run per
//! trajectory, metric rows at a fixed cadence, CSV output.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::thread;
use std::time::Instant;

use pkgtd_core::gtd::{gtd_step, gtd_value, GtdState};
use pkgtd_core::metrics::{percentage_error, DENOMINATOR_FLOOR};
use pkgtd_core::mountaincar::{
    generate_dataset, ground_truth, sample_eval_states, Dataset, EnergyPolicy, McState, StartDistribution,
};
use pkgtd_core::{run, LearnerState, Observer, StepRecord, Transition};

use crate::config::{ConfigError, ExperimentConfig, Method};
use crate::format::{self, FormatError};

pub const CSV_HEADER: &str = "t,percentage_error,model_order,wall_time_ms";

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("usage: {0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Format { path: PathBuf, source: FormatError },
    #[error(transparent)]
    Core(#[from] pkgtd_core::Error),
    #[error("trajectory {trajectory}: {source}")]
    Learner { trajectory: usize, source: pkgtd_core::RunError },
}

/// One point of a learning curve, averaged over trajectories.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricRow {
    /// Completed steps.
    pub t: u64,
    pub percentage_error: f64,
    /// Dictionary size `M_t`, or the feature count for the RBF baseline.
    pub model_order: f64,
    pub wall_time_ms: f64,
}

/// Per-step diagnostics of one trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepTrace {
    pub model_order: usize,
    pub delta: f64,
    pub z: f64,
    pub value_x: f64,
    pub value_y: f64,
    pub alpha: f64,
    pub eps: f64,
    /// `‖Ṽ_{t+1} − V_{t+1}‖_H`; zero for the baseline.
    pub compression_error: f64,
}

#[derive(Debug, Clone)]
pub struct TrajectoryRun {
    pub rows: Vec<MetricRow>,
    pub trace: Vec<StepTrace>,
    pub final_state: Option<LearnerState>,
}

/// Evaluation states with their Monte-Carlo values.
#[derive(Debug, Clone)]
pub struct EvalSet {
    pub states: Vec<McState>,
    pub truth: Vec<f64>,
    /// Rollouts that hit the step cap.
    pub capped: usize,
    /// States below the denominator floor, left out of the metric.
    pub excluded: usize,
}

impl EvalSet {
    pub fn build(cfg: &ExperimentConfig) -> Result<Self, HarnessError> {
        let states =
            sample_eval_states(&EnergyPolicy, cfg.eval_states, cfg.eval_len, cfg.eval_seed, &StartDistribution::default())?;
        let gt = ground_truth(&EnergyPolicy, &states, cfg.gamma)?;
        let truth: Vec<f64> = gt.iter().map(|g| g.value).collect();
        let capped = gt.iter().filter(|g| g.capped).count();
        let excluded = percentage_error(|_: &McState| 0.0, &states, &truth, DENOMINATOR_FLOOR)?.excluded;
        Ok(EvalSet { states, truth, capped, excluded })
    }

    pub fn score(&self, mut v: impl FnMut(&[f64]) -> f64) -> f64 {
        percentage_error(|s: &McState| v(&s.to_vec()), &self.states, &self.truth, DENOMINATOR_FLOOR)
            .map(|p| p.value)
            .expect("eval set checked at construction")
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub rows: Vec<MetricRow>,
    pub trajectories: Vec<TrajectoryRun>,
    pub eval_excluded: usize,
    pub eval_capped: usize,
}

impl ExperimentOutput {
    pub fn csv(&self) -> String {
        csv(&self.rows)
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Learning curve as CSV; floats carry 17 significant digits.
pub fn csv(rows: &[MetricRow]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            r.t,
            fmt_f64(r.percentage_error),
            fmt_f64(r.model_order),
            fmt_f64(r.wall_time_ms)
        );
    }
    s
}

fn write_file(path: &Path, contents: &str) -> Result<(), HarnessError> {
    std::fs::write(path, contents).map_err(|source| HarnessError::Io { path: path.to_owned(), source })
}

pub fn load_dataset(path: &Path) -> Result<Dataset, HarnessError> {
    let file = File::open(path).map_err(|source| HarnessError::Io { path: path.to_owned(), source })?;
    format::read_dataset(BufReader::new(file)).map_err(|source| HarnessError::Format { path: path.to_owned(), source })
}

pub fn save_dataset(data: &Dataset, path: &Path) -> Result<(), HarnessError> {
    let file = File::create(path).map_err(|source| HarnessError::Io { path: path.to_owned(), source })?;
    let mut w = BufWriter::new(file);
    format::write_dataset(data, &mut w)
        .and_then(|()| w.flush().map_err(FormatError::from))
        .map_err(|source| HarnessError::Format { path: path.to_owned(), source })
}

/// The configured dataset: loaded from `cfg.dataset` if set, else generated.
pub fn dataset(cfg: &ExperimentConfig) -> Result<Dataset, HarnessError> {
    match &cfg.dataset {
        Some(path) => load_dataset(path),
        None => Ok(generate_dataset(&EnergyPolicy, cfg.n_traj, cfg.steps, cfg.seed, &StartDistribution::default())?),
    }
}

/// Generates (or loads) the dataset and ground truth, runs every trajectory,
/// and writes the averaged curve to `cfg.out` if set.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput, HarnessError> {
    cfg.validate()?;
    let eval = EvalSet::build(cfg)?;
    let data = dataset(cfg)?;
    run_with(cfg, &data, &eval)
}

/// Runs `cfg` against a prepared dataset and evaluation set. On a learner
/// failure the rows every trajectory reached are still written.
pub fn run_with(cfg: &ExperimentConfig, data: &Dataset, eval: &EvalSet) -> Result<ExperimentOutput, HarnessError> {
    let results: Vec<Result<TrajectoryRun, PartialRun>> = thread::scope(|scope| {
        let handles: Vec<_> = data
            .trajectories
            .iter()
            .map(|traj| scope.spawn(move || run_trajectory(cfg, traj, eval)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("trajectory thread panicked")).collect()
    });
    let mut runs = Vec::with_capacity(results.len());
    let mut failure = None;
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(run) => runs.push(run),
            Err(partial) => {
                let (run, source) = *partial;
                runs.push(run);
                failure.get_or_insert(HarnessError::Learner { trajectory: i, source });
            }
        }
    }
    let rows = average(&runs);
    if let Some(path) = &cfg.out {
        write_file(path, &csv(&rows))?;
    }
    if let Some(err) = failure {
        return Err(err);
    }
    if let Some(path) = &cfg.checkpoint {
        for (i, run) in runs.iter().enumerate() {
            let target = if runs.len() == 1 { path.clone() } else { indexed(path, i) };
            if let Some(st) = &run.final_state {
                let mut buf = Vec::new();
                format::write_checkpoint(st, &mut buf)
                    .map_err(|source| HarnessError::Format { path: target.clone(), source })?;
                write_file(&target, &String::from_utf8_lossy(&buf))?;
            }
        }
    }
    Ok(ExperimentOutput { rows, trajectories: runs, eval_excluded: eval.excluded, eval_capped: eval.capped })
}

fn indexed(path: &Path, i: usize) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(format!(".{i}"));
    PathBuf::from(name)
}

/// Mean over trajectories of the rows they all reached.
fn average(runs: &[TrajectoryRun]) -> Vec<MetricRow> {
    let n = runs.iter().map(|r| r.rows.len()).min().unwrap_or(0);
    let k = runs.len() as f64;
    (0..n)
        .map(|i| {
            let mut row = MetricRow { t: runs[0].rows[i].t, percentage_error: 0.0, model_order: 0.0, wall_time_ms: 0.0 };
            for r in runs {
                let x = &r.rows[i];
                row.percentage_error += x.percentage_error / k;
                row.model_order += x.model_order / k;
                row.wall_time_ms += x.wall_time_ms / k;
            }
            row
        })
        .collect()
}

/// Rows reached before a learner failure, with the failure.
type PartialRun = Box<(TrajectoryRun, pkgtd_core::RunError)>;

struct Recorder<'a> {
    eval: &'a EvalSet,
    cadence: usize,
    started: Instant,
    deterministic: bool,
    rows: Vec<MetricRow>,
    trace: Vec<StepTrace>,
}

impl Recorder<'_> {
    fn elapsed_ms(&self) -> f64 {
        if self.deterministic {
            0.0
        } else {
            self.started.elapsed().as_secs_f64() * 1e3
        }
    }
}

impl Observer for Recorder<'_> {
    fn on_step(&mut self, r: &StepRecord<'_>) {
        self.trace.push(StepTrace {
            model_order: r.compressed.model_order(),
            delta: r.delta,
            z: r.z,
            value_x: r.value_x,
            value_y: r.value_y,
            alpha: r.rates.alpha,
            eps: r.rates.eps,
            compression_error: r.compression_error,
        });
    }

    fn cadence(&self) -> Option<usize> {
        Some(self.cadence)
    }

    fn on_checkpoint(&mut self, state: &LearnerState) {
        let wall_time_ms = self.elapsed_ms();
        let percentage_error = self.eval.score(|x| state.value.evaluate(x).unwrap_or(f64::NAN));
        self.rows.push(MetricRow {
            t: state.t,
            percentage_error,
            model_order: state.value.model_order() as f64,
            wall_time_ms,
        });
    }
}

fn run_trajectory(
    cfg: &ExperimentConfig,
    traj: &[Transition],
    eval: &EvalSet,
) -> Result<TrajectoryRun, PartialRun> {
    let mut rec = Recorder {
        eval,
        cadence: cfg.cadence,
        started: Instant::now(),
        deterministic: cfg.deterministic,
        rows: Vec::new(),
        trace: Vec::with_capacity(traj.len()),
    };
    match cfg.method {
        Method::Pkgtd => {
            let spec = cfg.kernel().expect("validated");
            match run(spec, traj, &cfg.learner(), &mut rec) {
                Ok(st) => Ok(TrajectoryRun { rows: rec.rows, trace: rec.trace, final_state: Some(st) }),
                Err(e) => {
                    let final_state = e.state.as_deref().cloned();
                    Err(Box::new((TrajectoryRun { rows: rec.rows, trace: rec.trace, final_state }, e)))
                }
            }
        }
        Method::GtdRbf => {
            let fail = |rec: Recorder<'_>, error| {
                let run = TrajectoryRun { rows: rec.rows, trace: rec.trace, final_state: None };
                Box::new((run, pkgtd_core::RunError { state: None, error }))
            };
            let grid = cfg.grid().expect("validated");
            let mut st = GtdState::zeros(grid.len());
            for (i, s) in traj.iter().enumerate() {
                let values = gtd_value(&st, &grid, &s.x).and_then(|vx| {
                    let vy = if s.terminal { 0.0 } else { gtd_value(&st, &grid, &s.y)? };
                    Ok((vx, vy))
                });
                let (value_x, value_y) = match values {
                    Ok(v) => v,
                    Err(e) => return Err(fail(rec, e)),
                };
                st = match gtd_step(&st, &grid, s, cfg.alpha, cfg.beta, cfg.gamma) {
                    Ok(next) => next,
                    Err(e) => return Err(fail(rec, e)),
                };
                rec.trace.push(StepTrace {
                    model_order: grid.len(),
                    delta: s.reward + cfg.gamma * value_y - value_x,
                    z: 0.0,
                    value_x,
                    value_y,
                    alpha: cfg.alpha,
                    eps: 0.0,
                    compression_error: 0.0,
                });
                let t = i + 1;
                if t % cfg.cadence == 0 || t == traj.len() {
                    let wall_time_ms = rec.elapsed_ms();
                    let percentage_error = eval.score(|x| gtd_value(&st, &grid, x).unwrap_or(f64::NAN));
                    rec.rows.push(MetricRow {
                        t: t as u64,
                        percentage_error,
                        model_order: grid.len() as f64,
                        wall_time_ms,
                    });
                }
            }
            Ok(TrajectoryRun { rows: rec.rows, trace: rec.trace, final_state: None })
        }
    }
}

/// Member runs of a comparison, labelled `<index>-<method>`.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub labels: Vec<String>,
    pub outputs: Vec<ExperimentOutput>,
}

impl Comparison {
    /// One `t` column, then one column group per member, aligned on `t`.
    pub fn csv(&self) -> String {
        let mut s = String::from("t");
        for label in &self.labels {
            for col in CSV_HEADER.split(',').skip(1) {
                let _ = write!(s, ",{label}.{col}");
            }
        }
        s.push('\n');
        let mut ts: Vec<u64> = self.outputs.iter().flat_map(|o| o.rows.iter().map(|r| r.t)).collect();
        ts.sort_unstable();
        ts.dedup();
        for t in ts {
            let _ = write!(s, "{t}");
            for o in &self.outputs {
                match o.rows.iter().find(|r| r.t == t) {
                    Some(r) => {
                        let _ = write!(
                            s,
                            ",{},{},{}",
                            fmt_f64(r.percentage_error),
                            fmt_f64(r.model_order),
                            fmt_f64(r.wall_time_ms)
                        );
                    }
                    None => s.push_str(",,,"),
                }
            }
            s.push('\n');
        }
        s
    }
}

/// Runs every member concurrently against one shared evaluation set.
pub fn compare(cfgs: &[ExperimentConfig], out: Option<&Path>) -> Result<Comparison, HarnessError> {
    if cfgs.len() < 2 {
        return Err(HarnessError::Usage(String::from("compare needs at least two configs")));
    }
    let first = &cfgs[0];
    for (i, c) in cfgs.iter().enumerate().skip(1) {
        if (c.eval_seed, c.eval_states, c.eval_len) != (first.eval_seed, first.eval_states, first.eval_len)
            || c.gamma.to_bits() != first.gamma.to_bits()
        {
            return Err(HarnessError::Usage(format!(
                "config {i} does not share the evaluation set of config 0 (eval seed, eval states, eval length, gamma)"
            )));
        }
    }
    for c in cfgs {
        c.validate()?;
    }
    let eval = EvalSet::build(first)?;
    let data: Vec<Dataset> = cfgs.iter().map(dataset).collect::<Result<_, _>>()?;
    let results: Vec<Result<ExperimentOutput, HarnessError>> = thread::scope(|scope| {
        let eval = &eval;
        let handles: Vec<_> =
            cfgs.iter().zip(&data).map(|(c, d)| scope.spawn(move || run_with(c, d, eval))).collect();
        handles.into_iter().map(|h| h.join().expect("member thread panicked")).collect()
    });
    let outputs = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let labels = cfgs.iter().enumerate().map(|(i, c)| format!("{i}-{}", c.method)).collect();
    let cmp = Comparison { labels, outputs };
    if let Some(path) = out {
        write_file(path, &cmp.csv())?;
    }
    Ok(cmp)
}
