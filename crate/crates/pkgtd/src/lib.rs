//! Experiment harness for `pkgtd-core`: configuration, text formats,
//! learning-curve runs and method comparisons on Mountain Car.

pub mod config;
pub mod experiment;
pub mod format;

pub use pkgtd_core as core;

pub use config::{ConfigError, ExperimentConfig, Method, ScheduleKind};
pub use experiment::{
    compare, csv, run_experiment, run_with, Comparison, EvalSet, ExperimentOutput, HarnessError, MetricRow,
    StepTrace, TrajectoryRun,
};
pub use format::FormatError;
