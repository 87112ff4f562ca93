//! Policy evaluation by parsimonious kernel gradient temporal difference.
//!
//! The value function lives in a reproducing kernel Hilbert space and is
//! learned by functional stochastic quasi-gradient descent on the squared
//! expected temporal difference. After every step the kernel dictionary is
//! pruned by destructive kernel orthogonal matching pursuit, which keeps the
//! model order bounded while staying within a Hilbert-norm error budget.
//!
//! | module | contents |
//! |--------|----------|
//! | [`kernels`] | Gaussian and polynomial kernels, dictionaries, Gram matrices |
//! | [`rkhs`] | kernel expansions, inner products, Hilbert-norm projection |
//! | [`komp`] | greedy dictionary compression within a budget |
//! | [`learner`] | the learner, its step-size schedules and run loop |
//! | [`gtd`] | linear TDC baseline on an RBF grid |
//! | [`mountaincar`] | benchmark environment, policy, datasets, ground truth |
//! | [`metrics`] | percentage error against ground truth |
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod error;
pub mod gtd;
pub mod kernels;
pub mod komp;
pub mod learner;
pub mod linalg;
pub mod metrics;
pub mod mountaincar;
pub mod rkhs;

pub use error::{Error, Result};
pub use kernels::{eval_kernel, gram_matrix, Dictionary, KernelSpec};
pub use komp::{compress, removal_error, CompressionResult};
pub use learner::{
    pkgtd_step, quasi_gradient_deviation, run, sqg_step, temporal_difference, update_auxiliary,
    LearnerConfig, LearnerState, Observer, RunError, Schedule, StepRecord, StepSizes, Transition,
};
pub use rkhs::{
    hilbert_distance, hilbert_norm, hilbert_norm_sq, inner_product, project_coefficients,
    RkhsFunction,
};
