//! Linear base learners and their influence matrices.
//!
//! A linear learner fitted to design points `x_1 < … < x_n` is described by
//! its basis functions `g_1, …, g_n`: the fit to responses `y` is
//! `x ↦ Σ_j y_j g_j(x)`, and the influence matrix `S_ij = g_j(x_i)` captures
//! the fit at the design points. Two learners are bundled:
//!
//! * [`nadaraya_watson`]: kernel-weighted averaging; `S` is row-stochastic
//!   but not symmetric.
//! * [`smoothing_spline`]: the natural cubic smoothing spline, assembled by
//!   the banded Reinsch recursion; `S` is symmetric positive semi-definite
//!   with two unit eigenvalues (constants and linear trends pass through
//!   untouched).
//!
//! [`calibrate_df`] finds the spline penalty whose effective degrees of
//! freedom (the trace of `S`) hit a requested target.

mod dataset;
mod kernel;
mod spline;

pub use dataset::Dataset;
pub use kernel::{nadaraya_watson, nadaraya_watson_design, Kernel};
pub use spline::{calibrate_df, smoothing_spline, smoothing_spline_design};

use crate::linalg::{sym_eigen, Eigensystem, Matrix};
use crate::{Error, Result};
use std::sync::OnceLock;

/// Which learner produced a [`LearnerSystem`].
#[derive(Debug, Clone, PartialEq)]
pub enum LearnerKind {
    NadarayaWatson { bandwidth: f64, kernel: Kernel },
    SmoothingSpline { penalty: f64 },
    /// Influence matrix supplied directly (spectral studies, tests). Basis
    /// evaluation is unavailable.
    Synthetic,
}

#[derive(Debug, Clone)]
pub(crate) enum BasisData {
    Nw {
        bandwidth: f64,
        kernel: Kernel,
    },
    Spline(spline::SplineBasis),
    None,
}

/// A fitted linear learner: design points, influence matrix, and whatever
/// is needed to evaluate the basis functions off the design.
///
/// Immutable after construction; the eigendecomposition is computed on first
/// use and cached (thread-safe).
#[derive(Debug, Clone)]
pub struct LearnerSystem {
    x: Vec<f64>,
    s: Matrix,
    kind: LearnerKind,
    basis: BasisData,
    eig: OnceLock<Result<Eigensystem>>,
}

impl LearnerSystem {
    pub(crate) fn from_parts(x: Vec<f64>, s: Matrix, kind: LearnerKind, basis: BasisData) -> Result<Self> {
        // Both bundled learners reproduce constants: every row of S sums to 1.
        if !matches!(kind, LearnerKind::Synthetic) {
            for i in 0..s.n() {
                let defect = (s.row(i).iter().sum::<f64>() - 1.0).abs();
                if defect > 1e-9 {
                    return Err(Error::numeric(format!(
                        "row {i} of the influence matrix sums to 1{defect:+.3e}; \
                         constant reproduction violated"
                    )));
                }
            }
        }
        Ok(LearnerSystem {
            x,
            s,
            kind,
            basis,
            eig: OnceLock::new(),
        })
    }

    /// Wraps an explicit influence matrix with no basis attached.
    pub fn synthetic(s: Matrix) -> Result<Self> {
        let n = s.n();
        if n == 0 {
            return Err(Error::invalid("influence matrix must be non-empty"));
        }
        LearnerSystem::from_parts(Vec::new(), s, LearnerKind::Synthetic, BasisData::None)
    }

    pub fn n(&self) -> usize {
        self.s.n()
    }

    /// Design points the learner was fitted to (empty for synthetic systems).
    pub fn design(&self) -> &[f64] {
        &self.x
    }

    /// The influence matrix `S` with `S_ij = g_j(x_i)`.
    pub fn influence(&self) -> &Matrix {
        &self.s
    }

    pub fn kind(&self) -> &LearnerKind {
        &self.kind
    }

    /// Effective degrees of freedom: `trace(S)`.
    pub fn df(&self) -> f64 {
        self.s.trace()
    }

    /// All basis functions evaluated at one query point.
    ///
    /// At a design point `x_i` this reproduces row `i` of the influence
    /// matrix. Synthetic systems have no basis and return an input error.
    pub fn evaluate_basis(&self, q: f64) -> Result<Vec<f64>> {
        if !q.is_finite() {
            return Err(Error::invalid(format!("query point must be finite, got {q}")));
        }
        match &self.basis {
            BasisData::Nw { bandwidth, kernel } => {
                kernel::nw_basis_at(&self.x, *bandwidth, *kernel, q)
            }
            BasisData::Spline(basis) => Ok(basis.eval_all(q)),
            BasisData::None => Err(Error::invalid(
                "synthetic learner systems carry no basis functions",
            )),
        }
    }

    /// Cached spectral decomposition of `S`.
    ///
    /// Requires a symmetric influence matrix (the spline, or a symmetric
    /// synthetic system). Spline spectra are positive semi-definite by
    /// construction, so eigenvalues in `(-1e-12, 0)` are clamped to zero.
    pub fn eigensystem(&self) -> Result<&Eigensystem> {
        let computed = self.eig.get_or_init(|| {
            if !self.s.is_symmetric() {
                return Err(Error::invalid(
                    "spectral analysis requires a symmetric influence matrix; \
                     the kernel smoother is not symmetric",
                ));
            }
            let mut eig = sym_eigen(&self.s)?;
            if matches!(self.kind, LearnerKind::SmoothingSpline { .. }) {
                eig.clamp_small_negatives(1e-12);
            }
            Ok(eig)
        });
        computed.as_ref().map_err(Clone::clone)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_system_exposes_spectrum_but_no_basis() {
        let s = Matrix::identity(3);
        let sys = LearnerSystem::synthetic(s).unwrap();
        assert_eq!(sys.df(), 3.0);
        assert!(sys.evaluate_basis(0.0).is_err());
        let eig = sys.eigensystem().unwrap();
        assert_eq!(eig.values(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn asymmetric_synthetic_system_refuses_spectral_calls() {
        let s = Matrix::from_rows(2, vec![1.0, 0.5, 0.0, 1.0]).unwrap();
        let sys = LearnerSystem::synthetic(s).unwrap();
        assert!(sys.eigensystem().is_err());
    }
}
