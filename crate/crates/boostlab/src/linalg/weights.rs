use super::{norm_inf, sym_eigen, Eigensystem, Matrix};
use crate::{Error, Result};

/// Which dynamics produced a weight vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    /// Finite learning rate after `m` iterations.
    Discrete { lambda: f64, m: usize },
    /// Zero-rate limit at continuous time `t`.
    Limit { t: f64 },
}

/// Boosting weights `w` such that the fitted function is
/// `x ↦ mean(Y) + Σ_i w_i g_i(x)`.
///
/// Entries are always finite; the regime tag records the dynamics and its
/// parameter.
#[derive(Debug, Clone)]
pub struct WeightVector {
    values: Vec<f64>,
    regime: Regime,
}

impl WeightVector {
    fn checked(values: Vec<f64>, regime: Regime) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::numeric(match regime {
                Regime::Discrete { lambda, m } => format!(
                    "weights overflowed in the finite-rate recursion (lambda={lambda}, m={m})"
                ),
                Regime::Limit { t } => {
                    format!("weights overflowed in the limit evaluation at t={t}")
                }
            }));
        }
        Ok(WeightVector { values, regime })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }
}

fn check_dims(s: &Matrix, y: &[f64]) -> Result<usize> {
    let n = s.n();
    if y.len() != n {
        return Err(Error::invalid(format!(
            "response length {} does not match matrix order {n}",
            y.len()
        )));
    }
    Ok(n)
}

fn check_rate(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::invalid(format!(
            "learning rate must lie in (0, 1], got {lambda}"
        )));
    }
    Ok(())
}

/// Finite-rate boosting weights by running the recursion
/// `w_{j+1} = w_j + λ (ỹ - S w_j)` for `m` steps from `w_0 = 0`.
///
/// This *is* the reference dynamics; the closed forms below are algebraic
/// rearrangements of it and exist as independent cross-check routes.
pub fn discrete_weights(s: &Matrix, ytilde: &[f64], lambda: f64, m: usize) -> Result<WeightVector> {
    let n = check_dims(s, ytilde)?;
    check_rate(lambda)?;
    let mut w = vec![0.0; n];
    for _ in 0..m {
        let sw = s.matvec(&w);
        for i in 0..n {
            w[i] += lambda * (ytilde[i] - sw[i]);
        }
    }
    WeightVector::checked(w, Regime::Discrete { lambda, m })
}

/// Finite-rate weights through the geometric sum
/// `w_m = λ Σ_{j=0}^{m-1} (I - λS)^j ỹ`.
pub fn discrete_weights_geometric(
    s: &Matrix,
    ytilde: &[f64],
    lambda: f64,
    m: usize,
) -> Result<WeightVector> {
    let n = check_dims(s, ytilde)?;
    check_rate(lambda)?;
    let mut acc = vec![0.0; n];
    let mut p = ytilde.to_vec(); // p_j = (I - λS)^j ỹ
    for _ in 0..m {
        for i in 0..n {
            acc[i] += lambda * p[i];
        }
        let sp = s.matvec(&p);
        for i in 0..n {
            p[i] -= lambda * sp[i];
        }
    }
    WeightVector::checked(acc, Regime::Discrete { lambda, m })
}

/// Finite-rate weights through the alternating binomial expansion
/// `w_m = -Σ_{j=1}^m C(m,j) (-λ)^j S^{j-1} ỹ`.
///
/// Binomial coefficients are folded into the running scalar so no
/// intermediate factorial can overflow.
pub fn discrete_weights_binomial(
    s: &Matrix,
    ytilde: &[f64],
    lambda: f64,
    m: usize,
) -> Result<WeightVector> {
    let n = check_dims(s, ytilde)?;
    check_rate(lambda)?;
    let mut acc = vec![0.0; n];
    if m == 0 {
        return WeightVector::checked(acc, Regime::Discrete { lambda, m });
    }
    let mut power = ytilde.to_vec(); // S^{j-1} ỹ
    let mut coeff = (m as f64) * lambda; // -C(m,j) (-λ)^j at j = 1
    for j in 1..=m {
        for i in 0..n {
            acc[i] += coeff * power[i];
        }
        if j < m {
            power = s.matvec(&power);
            coeff *= -lambda * (m - j) as f64 / (j + 1) as f64;
        }
    }
    WeightVector::checked(acc, Regime::Discrete { lambda, m })
}

/// The exponential-decay coefficient `φ(μ, t) = (1 - e^{-μt}) / μ`, extended
/// continuously by `φ(0, t) = t`.
///
/// Below `|μt| < 1e-8` the ratio loses all significant digits to
/// cancellation, so a fixed four-term expansion around zero is used instead:
/// `t (1 - μt/2 + (μt)²/6 - (μt)³/24)`.
pub fn phi(mu: f64, t: f64) -> f64 {
    let mt = mu * t;
    if mt.abs() < 1e-8 {
        t * (1.0 - mt / 2.0 + mt * mt / 6.0 - mt * mt * mt / 24.0)
    } else {
        (1.0 - (-mt).exp()) / mu
    }
}

/// Zero-rate limit weights `w_t` for centered responses.
///
/// Enforces that `ytilde` sums to zero (within `1e-9 · n · max|ỹ|`), which
/// holds for mean-initialised boosting; see [`limit_weights_unchecked`] for
/// the raw dynamics without that requirement.
pub fn limit_weights(s: &Matrix, ytilde: &[f64], t: f64) -> Result<WeightVector> {
    let n = check_dims(s, ytilde)?;
    let sum: f64 = ytilde.iter().sum();
    let tol = 1e-9 * n as f64 * norm_inf(ytilde);
    if sum.abs() > tol {
        return Err(Error::invalid(format!(
            "responses must be centered: sum {sum:.3e} exceeds tolerance {tol:.3e}"
        )));
    }
    limit_weights_unchecked(s, ytilde, t)
}

/// Series length per sub-step. With `h‖S‖ ≤ 1/2` the terms shrink at least
/// as fast as `(1/2)^j / j!`, so 24 terms land far below machine precision.
const STEP_TERMS: usize = 24;

/// Accumulates `Σ_{j≥1} h^j (-S)^{j-1} v / j!` into `acc`: the exact weight
/// increment contributed by residual `v` over a window of length `h`.
fn phi_step_into(s: &Matrix, v: &[f64], h: f64, acc: &mut [f64]) {
    let n = v.len();
    let mut power = v.to_vec();
    let mut coeff = h;
    for j in 1..=STEP_TERMS {
        for i in 0..n {
            acc[i] += coeff * power[i];
        }
        if j < STEP_TERMS {
            power = s.matvec(&power);
            coeff *= -h / (j + 1) as f64;
        }
    }
}

/// Replaces `v` with `e^{-hS} v` via its Taylor series.
fn decay_in_place(s: &Matrix, v: &mut [f64], h: f64) {
    let n = v.len();
    let mut term = v.to_vec();
    for j in 1..=STEP_TERMS {
        let st = s.matvec(&term);
        let c = -h / j as f64;
        for i in 0..n {
            term[i] = c * st[i];
            v[i] += term[i];
        }
    }
}

/// Zero-rate limit weights for an arbitrary right-hand side.
///
/// Symmetric `S` uses the spectral form `Σ_j φ(μ_j, t) (u_j^T r) u_j`.
/// General `S` integrates `w' = r - S w` exactly in sub-unit windows: the
/// horizon splits into steps with `h‖S‖_∞ ≤ 1/2`, each adding the window's
/// weight increment and decaying the residual, both through short series.
/// A single series over the whole horizon would cancel catastrophically at
/// large `t`; the sub-unit windows keep every term below the running sum.
pub fn limit_weights_unchecked(s: &Matrix, rhs: &[f64], t: f64) -> Result<WeightVector> {
    let n = check_dims(s, rhs)?;
    if !(t >= 0.0) {
        return Err(Error::invalid(format!("time must be >= 0, got {t}")));
    }
    if s.is_symmetric() {
        let eig = sym_eigen(s)?;
        return WeightVector::checked(limit_weights_spectral(&eig, rhs, t), Regime::Limit { t });
    }
    if t == 0.0 {
        return WeightVector::checked(vec![0.0; n], Regime::Limit { t });
    }

    let steps_f = (2.0 * t * s.norm_inf()).ceil().max(1.0);
    if steps_f > 2e6 {
        return Err(Error::numeric(format!(
            "time horizon t={t} needs {steps_f:.0} sub-steps, beyond the supported range"
        )));
    }
    let steps = steps_f as usize;
    let h = t / steps_f;

    let mut acc = vec![0.0; n];
    let mut resid = rhs.to_vec(); // e^{-khS} rhs at the window start
    for k in 0..steps {
        phi_step_into(s, &resid, h, &mut acc);
        decay_in_place(s, &mut resid, h);
        let rmax = norm_inf(&resid);
        if !rmax.is_finite() {
            return Err(Error::numeric(format!(
                "weights overflowed in the limit evaluation at t={t}; the spectrum \
                 reaches far enough below zero that the dynamics diverge"
            )));
        }
        // Once the residual is too small to move the sum, stop early.
        let remaining = t - (k + 1) as f64 * h;
        if rmax * remaining.max(0.0) <= 1e-17 * norm_inf(&acc) {
            break;
        }
    }
    WeightVector::checked(acc, Regime::Limit { t })
}

/// Spectral evaluation of the limit weights from a precomputed
/// decomposition: `Σ_j φ(μ_j, t) (u_j^T r) u_j`.
pub fn limit_weights_spectral(eig: &Eigensystem, rhs: &[f64], t: f64) -> Vec<f64> {
    let mut c = eig.project(rhs);
    for (ci, &mu) in c.iter_mut().zip(eig.values()) {
        *ci *= phi(mu, t);
    }
    eig.combine(&c)
}
