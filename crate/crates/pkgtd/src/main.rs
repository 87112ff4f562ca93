use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pkgtd::config::ExperimentConfig;
use pkgtd::experiment::{compare, dataset, run_experiment, save_dataset};
use pkgtd::HarnessError;

#[derive(Parser, Debug)]
#[command(name = "pkgtd", version, about = "Kernel gradient-TD policy evaluation on Mountain Car")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one experiment and write its learning curve as CSV.
    Run {
        /// key = value config file; flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        flags: Flags,
    },
    /// Run several configs against a shared evaluation set.
    Compare {
        /// Member config files, at least two.
        #[arg(required = true, num_args = 1..)]
        configs: Vec<PathBuf>,
        /// Overrides applied to every member; --out names the comparison CSV.
        #[command(flatten)]
        flags: Flags,
    },
    /// Generate a transition dataset and write it to --out.
    Dataset {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// pkgtd or gtd-rbf.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    n_traj: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    cadence: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    eval_states: Option<usize>,
    #[arg(long)]
    grid_h1: Option<f64>,
    #[arg(long)]
    grid_h2: Option<f64>,
    /// constant or diminishing.
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long)]
    zeta: Option<f64>,
    #[arg(long)]
    eval_seed: Option<u64>,
    /// Load transitions from a dataset file.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Write final learner states here.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Record wall time as zero for byte-identical output.
    #[arg(long)]
    deterministic: bool,
}

impl Flags {
    fn pairs(&self, with_out: bool) -> Vec<(String, String)> {
        let mut v = Vec::new();
        let mut put = |k: &str, val: Option<String>| {
            if let Some(val) = val {
                v.push((k.to_owned(), val));
            }
        };
        let s = |x: &Option<f64>| x.map(|x| x.to_string());
        let p = |x: &Option<PathBuf>| x.as_ref().map(|x| x.display().to_string());
        put("method", self.method.clone());
        put("steps", self.steps.map(|x| x.to_string()));
        put("n_traj", self.n_traj.map(|x| x.to_string()));
        put("seed", self.seed.map(|x| x.to_string()));
        put("gamma", s(&self.gamma));
        put("alpha", s(&self.alpha));
        put("beta", s(&self.beta));
        put("lambda", s(&self.lambda));
        put("eps", s(&self.eps));
        put("cadence", self.cadence.map(|x| x.to_string()));
        put("eval_states", self.eval_states.map(|x| x.to_string()));
        put("grid_h1", s(&self.grid_h1));
        put("grid_h2", s(&self.grid_h2));
        put("schedule", self.schedule.clone());
        put("zeta", s(&self.zeta));
        put("eval_seed", self.eval_seed.map(|x| x.to_string()));
        put("dataset", p(&self.dataset));
        put("checkpoint", p(&self.checkpoint));
        if with_out {
            put("out", p(&self.out));
        }
        if self.deterministic {
            put("deterministic", Some(String::from("true")));
        }
        v
    }
}

fn load(config: Option<&PathBuf>, overrides: &[(String, String)]) -> Result<ExperimentConfig, HarnessError> {
    Ok(match config {
        Some(path) => ExperimentConfig::load(path, overrides)?,
        None => ExperimentConfig::from_pairs(overrides.iter().cloned())?,
    })
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pkgtd: {e}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Run { config, flags } => {
            let cfg = load(config.as_ref(), &flags.pairs(true))?;
            let out = run_experiment(&cfg)?;
            if cfg.out.is_none() {
                print!("{}", out.csv());
            }
            eprintln!(
                "{} trajectories, {} eval states ({} below the denominator floor, {} capped rollouts)",
                out.trajectories.len(),
                cfg.eval_states,
                out.eval_excluded,
                out.eval_capped
            );
        }
        Command::Compare { configs, flags } => {
            let overrides = flags.pairs(false);
            let cfgs = configs.iter().map(|p| load(Some(p), &overrides)).collect::<Result<Vec<_>, _>>()?;
            let cmp = compare(&cfgs, flags.out.as_deref())?;
            if flags.out.is_none() {
                print!("{}", cmp.csv());
            }
        }
        Command::Dataset { config, flags } => {
            let cfg = load(config.as_ref(), &flags.pairs(true))?;
            let path = cfg
                .out
                .as_ref()
                .ok_or_else(|| HarnessError::Usage(String::from("dataset needs --out")))?;
            save_dataset(&dataset(&cfg)?, path)?;
        }
    }
    Ok(())
}
