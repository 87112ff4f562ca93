//! One 5000-step run with the default constants, shared by the model-order checks.

use std::sync::OnceLock;

use pkgtd::{run_experiment, ExperimentConfig, ExperimentOutput, Method};

fn long_run() -> &'static ExperimentOutput {
    static OUT: OnceLock<ExperimentOutput> = OnceLock::new();
    OUT.get_or_init(|| {
        let mut c = ExperimentConfig::new(Method::Pkgtd);
        c.steps = 5000;
        c.n_traj = 1;
        c.cadence = 500;
        c.deterministic = true;
        run_experiment(&c).unwrap()
    })
}

fn orders() -> Vec<usize> {
    long_run().trajectories[0].trace.iter().map(|s| s.model_order).collect()
}

#[test]
fn model_order_peaks_before_final_fifth() {
    let m = orders();
    let cut = m.len() * 4 / 5;
    let early = *m[..cut].iter().max().unwrap();
    let late = *m[cut..].iter().max().unwrap();
    assert!(late <= early, "max M_t over the final 20% ({late}) exceeds the earlier max ({early})");
}

#[test]
fn final_model_order_below_rbf49_feature_count() {
    let rows = &long_run().rows;
    let last = rows.last().unwrap();
    assert_eq!(last.t, 5000);
    assert!(last.model_order < 49.0, "final M_t = {}", last.model_order);
}

#[test]
fn metric_rows_are_finite_and_increasing() {
    let rows = &long_run().rows;
    assert_eq!(rows.len(), 10);
    assert!(rows.windows(2).all(|w| w[0].t < w[1].t));
    assert!(rows.iter().all(|r| r.percentage_error.is_finite() && r.percentage_error >= 0.0));
}
