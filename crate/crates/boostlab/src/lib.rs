//! Linear L2-boosting with an explicit learning rate, its zero-rate limit,
//! and the error analysis that connects the two.
//!
//! The library is organised around the influence matrix `S` of a linear base
//! learner fitted to `n` design points:
//!
//! * [`linalg`]: dense symmetric/general eigensolvers, the matrix
//!   exponential, and the closed-form boosting weight formulas (finite rate
//!   and the continuous-time limit).
//! * [`learners`]: the two bundled linear learners (Nadaraya-Watson kernel
//!   smoother and natural cubic smoothing spline) plus degrees-of-freedom
//!   calibration.
//! * [`boosting`]: the iterative recursion, the limit flow, prediction, and
//!   a Runge-Kutta cross-check of the gradient-flow characterisation.
//! * [`errors`]: expected training/test error decompositions (bias² and
//!   variance per boosting time) and spectral diagnostics of the smoother.
//! * [`stochastic`]: subsampled boosting: randomized basis functions, the
//!   mean-field influence matrix, replicated runs, and the variance bound.
//! * [`sim`]: the bundled synthetic regression experiment (triangle-wave
//!   signal, uniform design, Gaussian noise).
//!
//! All randomness flows through counter-based ChaCha streams ([`rng`]) so
//! every result is reproducible from a single 64-bit seed, independently of
//! thread scheduling.

pub mod boosting;
pub mod errors;
pub mod learners;
pub mod linalg;
pub mod rng;
pub mod sim;
pub mod stochastic;

/// Errors produced by the numerical routines.
///
/// `InvalidInput` marks precondition violations (caller bugs or unusable
/// configurations); `Numeric` marks algorithmic failures such as iteration
/// budgets being exhausted. Both carry a human-readable account of what went
/// wrong, including the offending values where that helps debugging.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}

pub use boosting::Init;
pub use learners::{Dataset, Kernel, LearnerKind, LearnerSystem};
pub use linalg::{Eigensystem, Matrix, Stability};
