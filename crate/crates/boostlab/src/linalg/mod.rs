//! Dense linear algebra for boosting weight dynamics.
//!
//! Everything here works on small dense matrices (`n` up to a few hundred):
//! a row-major [`Matrix`] with an explicit symmetry tag, symmetric and
//! general eigensolvers, the matrix exponential, and the weight formulas
//! shared by the whole crate:
//!
//! * [`discrete_weights`]: the finite-rate recursion
//!   `w_{m+1} = (I - λS) w_m + λ ỹ`, plus two algebraically equivalent
//!   closed forms used as cross-checks.
//! * [`limit_weights`]: the zero-rate limit `w_t`, evaluated spectrally for
//!   symmetric `S` and by an adaptive series otherwise.
//! * [`stability_check`]: classifies whether `w_t` stays bounded as
//!   `t → ∞` from the spectrum of `S`.

mod eigen;
mod expm;
mod matrix;
mod stability;
mod weights;

pub use eigen::{general_eigenvalues, sym_eigen, Eigensystem};
pub use expm::{expm_action, expm_action_spectral, expm_dense};
pub use matrix::Matrix;
pub use stability::{stability_check, Stability};
pub use weights::{
    discrete_weights, discrete_weights_binomial, discrete_weights_geometric, limit_weights,
    limit_weights_spectral, limit_weights_unchecked, phi, Regime, WeightVector,
};

/// Dot product of two equal-length slices.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm.
pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Max-absolute-entry norm.
pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Arithmetic mean; 0 for an empty slice.
pub fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Returns `v` with its mean subtracted.
pub fn centered(v: &[f64]) -> Vec<f64> {
    let m = mean(v);
    v.iter().map(|x| x - m).collect()
}

/// `exp(-u)` with underflow below ~1e-300 flushed to an exact zero.
///
/// Error formulas raise `e^{-2 t μ}` across wide `t` grids; flushing keeps
/// the vanished terms from polluting sums with subnormals.
pub fn exp_neg(u: f64) -> f64 {
    if u > 690.0 {
        0.0
    } else {
        (-u).exp()
    }
}
