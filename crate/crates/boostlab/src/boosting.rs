//! The boosting recursion at finite learning rate and its continuous-time
//! limit, evaluated at arbitrary query points.
//!
//! Both regimes reduce to weight vectors over the design points: the fitted
//! function is always `offset + Σ_i w_i g_i(x)`. The discrete path keeps
//! every iterate `w_0..w_M`; the limit regime evaluates `w_t` directly per
//! time point. An independent Runge-Kutta integrator cross-checks that the
//! limit weights solve the flow `w' = ỹ - Sw`.

use crate::learners::LearnerSystem;
use crate::linalg::{
    dot, limit_weights_unchecked, mean, norm_inf, phi,
};
use crate::{Error, Result};

/// Choice of starting predictor: the response mean (recommended) or zero.
///
/// With `Zero` the recursion runs on raw responses instead of centered ones
/// and the constant offset is dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Init {
    Mean,
    Zero,
}

impl Init {
    /// Constant offset and working responses for this initialization.
    pub(crate) fn split(self, y: &[f64]) -> (f64, Vec<f64>) {
        match self {
            Init::Mean => {
                let ybar = mean(y);
                (ybar, y.iter().map(|yi| yi - ybar).collect())
            }
            Init::Zero => (0.0, y.to_vec()),
        }
    }
}

fn validate_responses(learner: &LearnerSystem, y: &[f64]) -> Result<()> {
    if y.len() != learner.n() {
        return Err(Error::invalid(format!(
            "response length {} does not match design size {}",
            y.len(),
            learner.n()
        )));
    }
    if let Some(bad) = y.iter().find(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("non-finite response {bad}")));
    }
    Ok(())
}

fn validate_rate(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::invalid(format!(
            "learning rate must lie in (0, 1], got {lambda}"
        )));
    }
    Ok(())
}

fn predict_from_weights(
    learner: &LearnerSystem,
    offset: f64,
    w: &[f64],
    queries: &[f64],
) -> Result<Vec<f64>> {
    queries
        .iter()
        .map(|&q| Ok(offset + dot(w, &learner.evaluate_basis(q)?)))
        .collect()
}

/// Full iterate history of the finite-rate recursion
/// `w_{m+1} = w_m + λ(ỹ - S w_m)` from `w_0 = 0`.
#[derive(Debug)]
pub struct BoostPath<'a> {
    learner: &'a LearnerSystem,
    lambda: f64,
    init: Init,
    offset: f64,
    tilde: Vec<f64>,
    weights: Vec<Vec<f64>>,
}

impl<'a> BoostPath<'a> {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn init(&self) -> Init {
        self.init
    }

    /// Constant offset of every prediction (the response mean, or 0).
    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Largest stored iteration count.
    pub fn m_max(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn weights(&self, m: usize) -> &[f64] {
        &self.weights[m]
    }

    /// Fitted values at the design points after `m` iterations.
    pub fn fitted(&self, m: usize) -> Vec<f64> {
        let sw = self.learner.influence().matvec(&self.weights[m]);
        sw.iter().map(|v| self.offset + v).collect()
    }

    /// Residuals `y - F̂_m` at the design points.
    pub fn residuals(&self, m: usize) -> Vec<f64> {
        let sw = self.learner.influence().matvec(&self.weights[m]);
        self.tilde.iter().zip(&sw).map(|(t, v)| t - v).collect()
    }

    /// Predictions after `m` iterations at arbitrary query points.
    pub fn predict(&self, m: usize, queries: &[f64]) -> Result<Vec<f64>> {
        predict_from_weights(self.learner, self.offset, &self.weights[m], queries)
    }

    /// Largest violation of the defining recursion across the stored path,
    /// in the sup norm. Zero up to roundoff by construction; exposed so
    /// consumers can audit paths they did not build themselves.
    pub fn recursion_defect(&self) -> f64 {
        let s = self.learner.influence();
        let mut worst: f64 = norm_inf(&self.weights[0]);
        for m in 0..self.m_max() {
            let sw = s.matvec(&self.weights[m]);
            for i in 0..self.tilde.len() {
                let step = self.weights[m][i] + self.lambda * (self.tilde[i] - sw[i]);
                worst = worst.max((self.weights[m + 1][i] - step).abs());
            }
        }
        worst
    }
}

/// Runs `m_max` iterations of the boosting recursion and keeps every
/// iterate.
pub fn boost_discrete<'a>(
    learner: &'a LearnerSystem,
    y: &[f64],
    lambda: f64,
    m_max: usize,
    init: Init,
) -> Result<BoostPath<'a>> {
    validate_responses(learner, y)?;
    validate_rate(lambda)?;
    let (offset, tilde) = init.split(y);
    let n = learner.n();
    let s = learner.influence();

    let mut weights = Vec::with_capacity(m_max + 1);
    weights.push(vec![0.0; n]);
    for _ in 0..m_max {
        let current = weights.last().expect("path starts with w_0");
        let sw = s.matvec(current);
        let next: Vec<f64> = (0..n)
            .map(|i| current[i] + lambda * (tilde[i] - sw[i]))
            .collect();
        if let Some(bad) = next.iter().find(|v| !v.is_finite()) {
            return Err(Error::numeric(format!(
                "boosting diverged at iteration {} (weight {bad})",
                weights.len()
            )));
        }
        weights.push(next);
    }
    Ok(BoostPath {
        learner,
        lambda,
        init,
        offset,
        tilde,
        weights,
    })
}

/// The limit predictor at one time point: its weights and its values at the
/// design points.
#[derive(Debug, Clone)]
pub struct LimitEvaluation {
    t: f64,
    offset: f64,
    weights: Vec<f64>,
    values: Vec<f64>,
}

impl LimitEvaluation {
    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Values of the limit predictor at the design points.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Predictions at arbitrary query points.
    pub fn predict(&self, learner: &LearnerSystem, queries: &[f64]) -> Result<Vec<f64>> {
        predict_from_weights(learner, self.offset, &self.weights, queries)
    }
}

fn validate_t_grid(t_grid: &[f64]) -> Result<()> {
    for w in t_grid.windows(2) {
        if w[1] < w[0] {
            return Err(Error::invalid(format!(
                "time grid must be ascending, found {} after {}",
                w[1], w[0]
            )));
        }
    }
    if let Some(bad) = t_grid.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(Error::invalid(format!(
            "time grid entries must be finite and >= 0, got {bad}"
        )));
    }
    Ok(())
}

/// Evaluates the vanishing-rate limit predictor on an ascending time grid.
///
/// Symmetric learners go through the cached eigendecomposition (one
/// decomposition for the whole grid); others fall back to the power-series
/// weights per grid point.
pub fn boost_limit(
    learner: &LearnerSystem,
    y: &[f64],
    t_grid: &[f64],
    init: Init,
) -> Result<Vec<LimitEvaluation>> {
    validate_responses(learner, y)?;
    validate_t_grid(t_grid)?;
    let (offset, tilde) = init.split(y);
    let s = learner.influence();

    let spectral = if s.is_symmetric() {
        Some((learner.eigensystem()?, learner.eigensystem()?.project(&tilde)))
    } else {
        None
    };

    t_grid
        .iter()
        .map(|&t| {
            let weights = match &spectral {
                Some((eig, proj)) => {
                    let coeffs: Vec<f64> = eig
                        .values()
                        .iter()
                        .zip(proj)
                        .map(|(&mu, &p)| phi(mu, t) * p)
                        .collect();
                    eig.combine(&coeffs)
                }
                None => limit_weights_unchecked(s, &tilde, t)?.into_values(),
            };
            let values: Vec<f64> = s
                .matvec(&weights)
                .iter()
                .map(|v| offset + v)
                .collect();
            Ok(LimitEvaluation {
                t,
                offset,
                weights,
                values,
            })
        })
        .collect()
}

/// Integrates the weight flow `w' = ỹ - Sw` from `w_0 = 0` with classical
/// fourth-order Runge-Kutta and returns the largest sup-norm gap against the
/// closed-form limit weights.
///
/// The responses are centered (mean initialization). The step budget must
/// satisfy `steps ≥ 100·T·‖S‖_∞` so the integrator is well inside its
/// stability region. Symmetric learners are compared at every step via the
/// cached eigendecomposition; general learners at no more than 256 evenly
/// spaced steps (the series evaluation per point is much more expensive).
pub fn ode_crosscheck(learner: &LearnerSystem, y: &[f64], t_max: f64, steps: usize) -> Result<f64> {
    validate_responses(learner, y)?;
    if !(t_max.is_finite() && t_max >= 0.0) {
        return Err(Error::invalid(format!(
            "integration horizon must be finite and >= 0, got {t_max}"
        )));
    }
    if t_max == 0.0 {
        return Ok(0.0);
    }
    let s = learner.influence();
    let required = (100.0 * t_max * s.norm_inf()).ceil() as usize;
    if steps < required.max(1) {
        return Err(Error::invalid(format!(
            "step budget {steps} too small for horizon {t_max}; need at least {}",
            required.max(1)
        )));
    }

    let tilde = Init::Mean.split(y).1;
    let n = learner.n();
    let h = t_max / steps as f64;

    let spectral = if s.is_symmetric() {
        let eig = learner.eigensystem()?;
        let proj = eig.project(&tilde);
        Some((eig, proj))
    } else {
        None
    };
    let compare_every = if spectral.is_some() {
        1
    } else {
        (steps / 256).max(1)
    };

    let deriv = |w: &[f64]| -> Vec<f64> {
        let sw = s.matvec(w);
        (0..n).map(|i| tilde[i] - sw[i]).collect()
    };

    let mut w = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    let mut worst: f64 = 0.0;
    for step in 1..=steps {
        let k1 = deriv(&w);
        for i in 0..n {
            scratch[i] = w[i] + 0.5 * h * k1[i];
        }
        let k2 = deriv(&scratch);
        for i in 0..n {
            scratch[i] = w[i] + 0.5 * h * k2[i];
        }
        let k3 = deriv(&scratch);
        for i in 0..n {
            scratch[i] = w[i] + h * k3[i];
        }
        let k4 = deriv(&scratch);
        for i in 0..n {
            w[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }

        if step % compare_every == 0 || step == steps {
            let t = h * step as f64;
            let reference = match &spectral {
                Some((eig, proj)) => limit_weights_spectral_from(eig, proj, t),
                None => limit_weights_unchecked(s, &tilde, t)?.into_values(),
            };
            for i in 0..n {
                worst = worst.max((w[i] - reference[i]).abs());
            }
        }
    }
    Ok(worst)
}

fn limit_weights_spectral_from(
    eig: &crate::linalg::Eigensystem,
    proj: &[f64],
    t: f64,
) -> Vec<f64> {
    let coeffs: Vec<f64> = eig
        .values()
        .iter()
        .zip(proj)
        .map(|(&mu, &p)| phi(mu, t) * p)
        .collect();
    eig.combine(&coeffs)
}
