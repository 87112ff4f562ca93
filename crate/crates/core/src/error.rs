use core::fmt;

/// Errors produced by the policy-evaluation core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two state vectors (or a state and a kernel) disagree on dimension.
    DimensionMismatch { expected: usize, found: usize },
    /// Kernel parameters violate their invariants.
    InvalidKernel(&'static str),
    /// Two functions built on different kernels were combined.
    KernelMismatch,
    /// A Gram system could not be solved even with jitter and the
    /// pseudo-inverse fallback.
    SolverFailure { condition: f64 },
    /// An index past the end of a dictionary.
    IndexOutOfRange { index: usize, len: usize },
    /// A learner, baseline or environment parameter is out of range.
    InvalidConfig(&'static str),
    /// Every evaluation state fell under the denominator floor.
    MetricUndefined { excluded: usize },
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::InvalidKernel(msg) => write!(f, "invalid kernel: {msg}"),
            Error::KernelMismatch => write!(f, "functions use different kernels"),
            Error::SolverFailure { condition } => {
                write!(f, "gram solve failed (condition estimate {condition:e})")
            }
            Error::IndexOutOfRange { index, len } => {
                write!(f, "index {index} out of range for dictionary of size {len}")
            }
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::MetricUndefined { excluded } => write!(
                f,
                "percentage error undefined: all {excluded} states below the denominator floor"
            ),
        }
    }
}

impl core::error::Error for Error {}
