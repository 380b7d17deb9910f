//! Closed-form expected-error decompositions for the boosting flow, in both
//! the limit and finite-rate regimes, plus spectral diagnostics of the
//! smoothing operator.
//!
//! Everything here works through the eigendecomposition `S = Σ μ_i u_iu_iᵀ`
//! of a symmetric learner. With mean initialization the residual dynamics
//! act on the centered truth `f̃` and the centering projection
//! `J = I - 11ᵀ/n`; with zero initialization the same formulas run on the
//! raw truth `f` and the identity.

use crate::boosting::Init;
use crate::learners::LearnerSystem;
use crate::linalg::{exp_neg, mean, phi, Matrix};
use crate::{Error, Result};

/// Which error is being decomposed: in-sample, out-of-sample at the design
/// points, or out-of-sample with fresh covariates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Train,
    TestFixed,
    TestExtrapolate,
}

/// Expected-error decomposition along a time grid.
///
/// `total = bias2 + var` pointwise; `noise_floor` is the irreducible part of
/// the variance (0 in-sample, `σ² + σ²/n` at fixed covariates,
/// `(n+1)σ²/n` with extrapolation).
#[derive(Debug, Clone)]
pub struct ErrorCurves {
    kind: ErrorKind,
    t: Vec<f64>,
    bias2: Vec<f64>,
    var: Vec<f64>,
    total: Vec<f64>,
    noise_floor: f64,
}

impl ErrorCurves {
    pub fn kind(&self) -> ErrorKind {
        self.kind
    }

    pub fn t_grid(&self) -> &[f64] {
        &self.t
    }

    pub fn bias2(&self) -> &[f64] {
        &self.bias2
    }

    pub fn var(&self) -> &[f64] {
        &self.var
    }

    pub fn total(&self) -> &[f64] {
        &self.total
    }

    pub fn noise_floor(&self) -> f64 {
        self.noise_floor
    }

    fn assemble(kind: ErrorKind, t: Vec<f64>, bias2: Vec<f64>, var: Vec<f64>, floor: f64) -> Self {
        let total = bias2.iter().zip(&var).map(|(b, v)| b + v).collect();
        ErrorCurves {
            kind,
            t,
            bias2,
            var,
            total,
            noise_floor: floor,
        }
    }
}

fn validate_common(
    learner: &LearnerSystem,
    f_values: &[f64],
    sigma: f64,
    t_grid: &[f64],
) -> Result<()> {
    if f_values.len() != learner.n() {
        return Err(Error::invalid(format!(
            "truth vector length {} does not match design size {}",
            f_values.len(),
            learner.n()
        )));
    }
    if let Some(bad) = f_values.iter().find(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("non-finite truth value {bad}")));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(format!(
            "noise standard deviation must be finite and >= 0, got {sigma}"
        )));
    }
    if let Some(bad) = t_grid.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(Error::invalid(format!(
            "time grid entries must be finite and >= 0, got {bad}"
        )));
    }
    Ok(())
}

/// Spectral ingredients of the error formulas: per eigendirection the decay
/// rate, the truth coefficient, and the squared length of the projected
/// (or raw) direction that carries the noise.
struct ErrorParts {
    mu: Vec<f64>,
    truth_coeff: Vec<f64>,
    noise_weight: Vec<f64>,
}

fn error_parts(learner: &LearnerSystem, f_values: &[f64], init: Init) -> Result<ErrorParts> {
    let eig = learner.eigensystem()?;
    let n = learner.n() as f64;
    let (truth_coeff, noise_weight) = match init {
        Init::Mean => {
            let fbar = mean(f_values);
            let centered: Vec<f64> = f_values.iter().map(|v| v - fbar).collect();
            let d = eig.project(&centered);
            let ones = vec![1.0; learner.n()];
            let s1 = eig.project(&ones);
            // ‖Ju_i‖² = 1 - (1ᵀu_i)²/n for unit vectors.
            let j: Vec<f64> = s1.iter().map(|si| 1.0 - si * si / n).collect();
            (d, j)
        }
        Init::Zero => (eig.project(f_values), vec![1.0; learner.n()]),
    };
    Ok(ErrorParts {
        mu: eig.values().to_vec(),
        truth_coeff,
        noise_weight,
    })
}

/// Residual shrinkage per eigendirection after "time" t: `e^{-tμ}` in the
/// limit regime, `(1-λμ)^[t/λ]` at finite rate.
enum Decay {
    Limit,
    Discrete(f64),
}

impl Decay {
    fn factor(&self, mu: f64, t: f64) -> Result<f64> {
        match self {
            Decay::Limit => Ok(exp_neg(t * mu)),
            Decay::Discrete(lambda) => {
                let m = (t / lambda).floor();
                if m > i32::MAX as f64 {
                    return Err(Error::invalid(format!(
                        "iteration count {m} for t={t}, rate={lambda} is too large"
                    )));
                }
                Ok((1.0 - lambda * mu).powi(m as i32))
            }
        }
    }
}

fn validate_rate(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::invalid(format!(
            "learning rate must lie in (0, 1], got {lambda}"
        )));
    }
    Ok(())
}

fn train_curves(
    learner: &LearnerSystem,
    f_values: &[f64],
    sigma: f64,
    t_grid: &[f64],
    init: Init,
    decay: Decay,
) -> Result<ErrorCurves> {
    validate_common(learner, f_values, sigma, t_grid)?;
    let parts = error_parts(learner, f_values, init)?;
    let n = learner.n() as f64;
    let s2 = sigma * sigma;
    let mut bias2 = Vec::with_capacity(t_grid.len());
    let mut var = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let mut b = 0.0;
        let mut v = 0.0;
        for i in 0..parts.mu.len() {
            let r = decay.factor(parts.mu[i], t)?;
            let r2 = r * r;
            b += parts.truth_coeff[i] * parts.truth_coeff[i] * r2;
            v += parts.noise_weight[i] * r2;
        }
        bias2.push(b / n);
        var.push(s2 / n * v);
    }
    Ok(ErrorCurves::assemble(
        ErrorKind::Train,
        t_grid.to_vec(),
        bias2,
        var,
        0.0,
    ))
}

fn test_fixed_curves(
    learner: &LearnerSystem,
    f_values: &[f64],
    sigma: f64,
    t_grid: &[f64],
    init: Init,
    decay: Decay,
) -> Result<ErrorCurves> {
    validate_common(learner, f_values, sigma, t_grid)?;
    let parts = error_parts(learner, f_values, init)?;
    let n = learner.n() as f64;
    let s2 = sigma * sigma;
    let floor = s2 + s2 / n;
    let mut bias2 = Vec::with_capacity(t_grid.len());
    let mut var = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let mut b = 0.0;
        let mut v = 0.0;
        for i in 0..parts.mu.len() {
            let r = decay.factor(parts.mu[i], t)?;
            b += parts.truth_coeff[i] * parts.truth_coeff[i] * r * r;
            let grown = 1.0 - r;
            v += parts.noise_weight[i] * grown * grown;
        }
        bias2.push(b / n);
        var.push(floor + s2 / n * v);
    }
    Ok(ErrorCurves::assemble(
        ErrorKind::TestFixed,
        t_grid.to_vec(),
        bias2,
        var,
        floor,
    ))
}

/// Expected in-sample error of the limit predictor, split into squared bias
/// and variance per time point.
pub fn expected_train_error(
    learner: &LearnerSystem,
    f_values: &[f64],
    sigma: f64,
    t_grid: &[f64],
    init: Init,
) -> Result<ErrorCurves> {
    train_curves(learner, f_values, sigma, t_grid, init, Decay::Limit)
}

/// Expected in-sample error of the finite-rate predictor after
/// `[t/λ]` iterations, per time point.
pub fn expected_train_error_discrete(
    learner: &LearnerSystem,
    f_values: &[f64],
    sigma: f64,
    lambda: f64,
    t_grid: &[f64],
    init: Init,
) -> Result<ErrorCurves> {
    validate_rate(lambda)?;
    train_curves(learner, f_values, sigma, t_grid, init, Decay::Discrete(lambda))
}

/// Expected out-of-sample error at the design points (fresh responses, same
/// covariates) for the limit predictor.
pub fn expected_test_error_fixed(
    learner: &LearnerSystem,
    f_values: &[f64],
    sigma: f64,
    t_grid: &[f64],
    init: Init,
) -> Result<ErrorCurves> {
    test_fixed_curves(learner, f_values, sigma, t_grid, init, Decay::Limit)
}

/// Fixed-covariate test error for the finite-rate predictor after `[t/λ]`
/// iterations.
pub fn expected_test_error_fixed_discrete(
    learner: &LearnerSystem,
    f_values: &[f64],
    sigma: f64,
    lambda: f64,
    t_grid: &[f64],
    init: Init,
) -> Result<ErrorCurves> {
    validate_rate(lambda)?;
    test_fixed_curves(learner, f_values, sigma, t_grid, init, Decay::Discrete(lambda))
}

/// Expected test error with fresh covariates drawn from `sampler`, for the
/// mean-initialized limit predictor.
///
/// The outer expectation over the new covariate is replaced by a Monte
/// Carlo average of `n_mc` draws; everything inside is exact. The kernel
/// `A_t = Σ φ(μ_i, t) u_iu_iᵀ` (with `φ(μ,t) = (1-e^{-μt})/μ` continued by
/// `φ(0,t) = t`) is evaluated spectrally, so zero eigenvalues are handled
/// exactly; genuinely negative spectra are rejected.
pub fn expected_test_error_extrapolate(
    learner: &LearnerSystem,
    f_true: &dyn Fn(f64) -> f64,
    sigma: f64,
    t_grid: &[f64],
    sampler: &mut dyn FnMut() -> f64,
    n_mc: usize,
) -> Result<ErrorCurves> {
    let n = learner.n();
    let f_values: Vec<f64> = learner.design().iter().map(|&x| f_true(x)).collect();
    validate_common(learner, &f_values, sigma, t_grid)?;
    if n_mc == 0 {
        return Err(Error::invalid("need at least one covariate draw"));
    }
    let eig = learner.eigensystem()?;
    if let Some(&bad) = eig.values().iter().find(|&&mu| mu < -1e-10) {
        return Err(Error::invalid(format!(
            "extrapolated test error needs a nonnegative spectrum, found eigenvalue {bad:.3e}"
        )));
    }

    let fbar = mean(&f_values);
    let centered: Vec<f64> = f_values.iter().map(|v| v - fbar).collect();
    let d = eig.project(&centered);
    let ones = vec![1.0; n];
    let s1 = eig.project(&ones);
    let nf = n as f64;
    let s2 = sigma * sigma;

    // φ(μ_i, t) tables, one row per grid point.
    let phi_rows: Vec<Vec<f64>> = t_grid
        .iter()
        .map(|&t| eig.values().iter().map(|&mu| phi(mu, t)).collect())
        .collect();

    let mut bias_acc = vec![0.0; t_grid.len()];
    let mut var_acc = vec![0.0; t_grid.len()];
    for _ in 0..n_mc {
        let xq = sampler();
        let fq = f_true(xq);
        if !fq.is_finite() {
            return Err(Error::invalid(format!(
                "truth function returned {fq} at covariate {xq}"
            )));
        }
        let g = learner.evaluate_basis(xq)?;
        let c = eig.project(&g);
        for (row, phis) in phi_rows.iter().enumerate() {
            let mut shift = 0.0;
            let mut norm2 = 0.0;
            let mut along1 = 0.0;
            for i in 0..n {
                let pc = phis[i] * c[i];
                shift += pc * d[i];
                norm2 += pc * pc;
                along1 += pc * s1[i];
            }
            let dev = fq - fbar - shift;
            bias_acc[row] += dev * dev;
            var_acc[row] += norm2 - along1 * along1 / nf;
        }
    }

    let floor = (nf + 1.0) / nf * s2;
    let denom = n_mc as f64;
    let bias2: Vec<f64> = bias_acc.iter().map(|b| b / denom).collect();
    let var: Vec<f64> = var_acc.iter().map(|v| floor + s2 * v / denom).collect();
    Ok(ErrorCurves::assemble(
        ErrorKind::TestExtrapolate,
        t_grid.to_vec(),
        bias2,
        var,
        floor,
    ))
}

/// Spectral view of the limit operator on a time grid: per-direction
/// coefficients `c_i(t)` and effective degrees of freedom.
///
/// The first coefficient is pinned at 1 (the constant direction is fitted
/// immediately by the mean offset); every other direction carries
/// `c_i(t) = 1 - e^{-μ_i t}`, so `df(t) = 1 + Σ_{i≥2} c_i(t)`. When the top
/// of the spectrum is a cluster of (near-)unit eigenvalues containing the
/// constant direction, the cluster basis is rotated so the first
/// eigenvector is exactly the normalized constant; this leaves the operator
/// unchanged and makes the leading/trailing eigenvector views canonical.
#[derive(Debug, Clone)]
pub struct SpectralDiagnostics {
    t: Vec<f64>,
    values: Vec<f64>,
    vectors: Matrix,
    coefficients: Vec<Vec<f64>>,
    df: Vec<f64>,
}

impl SpectralDiagnostics {
    pub fn t_grid(&self) -> &[f64] {
        &self.t
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    /// Eigenvector `j` (column of the rotated basis).
    pub fn vector(&self, j: usize) -> Vec<f64> {
        self.vectors.col(j)
    }

    /// Per-direction coefficients at grid point `row`.
    pub fn coefficients(&self, row: usize) -> &[f64] {
        &self.coefficients[row]
    }

    /// Effective degrees of freedom per grid point.
    pub fn df(&self) -> &[f64] {
        &self.df
    }

    /// The first `k` eigenvectors (slow, structured directions).
    pub fn leading_vectors(&self, k: usize) -> Vec<Vec<f64>> {
        (0..k.min(self.values.len())).map(|j| self.vector(j)).collect()
    }

    /// The last `k` eigenvectors (fast, noise-like directions).
    pub fn trailing_vectors(&self, k: usize) -> Vec<Vec<f64>> {
        let n = self.values.len();
        (n.saturating_sub(k)..n).map(|j| self.vector(j)).collect()
    }
}

/// Rotates an orthonormal basis of a (near-)degenerate leading cluster so
/// its first vector is the normalized constant, when the constant lies in
/// the cluster's span.
fn rotate_unit_cluster(values: &[f64], vectors: &mut Matrix) {
    let n = values.len();
    let cluster: Vec<usize> = (0..n).filter(|&i| values[i] >= 1.0 - 1e-8).collect();
    if cluster.is_empty() {
        return;
    }
    // Component of the constant inside the cluster span.
    let mut target = vec![0.0; n];
    for &j in &cluster {
        let coeff: f64 = (0..n).map(|r| vectors.get(r, j)).sum();
        for (r, tv) in target.iter_mut().enumerate() {
            *tv += coeff * vectors.get(r, j);
        }
    }
    let norm = target.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm < 1e-8 * (n as f64).sqrt() {
        return; // constant direction not represented in the cluster
    }
    for tv in target.iter_mut() {
        *tv /= norm;
    }

    // Gram-Schmidt: the normalized constant first, then whatever parts of
    // the original cluster vectors remain independent.
    let mut basis: Vec<Vec<f64>> = vec![target];
    for &j in &cluster {
        if basis.len() == cluster.len() {
            break;
        }
        let mut candidate: Vec<f64> = (0..n).map(|r| vectors.get(r, j)).collect();
        for b in &basis {
            let overlap: f64 = candidate.iter().zip(b).map(|(a, c)| a * c).sum();
            for (cv, bv) in candidate.iter_mut().zip(b) {
                *cv -= overlap * bv;
            }
        }
        let cn = candidate.iter().map(|v| v * v).sum::<f64>().sqrt();
        if cn > 1e-8 {
            for cv in candidate.iter_mut() {
                *cv /= cn;
            }
            basis.push(candidate);
        }
    }
    if basis.len() != cluster.len() {
        return; // degenerate beyond repair; keep the solver's basis
    }
    for (slot, &j) in cluster.iter().enumerate() {
        for r in 0..n {
            vectors.set(r, j, basis[slot][r]);
        }
    }
}

/// Computes the smoothed-projection coefficients and degrees of freedom of
/// a symmetric learner along a time grid.
pub fn spectral_diagnostics(learner: &LearnerSystem, t_grid: &[f64]) -> Result<SpectralDiagnostics> {
    if let Some(bad) = t_grid.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(Error::invalid(format!(
            "time grid entries must be finite and >= 0, got {bad}"
        )));
    }
    let eig = learner.eigensystem()?;
    let values = eig.values().to_vec();
    let mut vectors = eig.vectors().clone();
    rotate_unit_cluster(&values, &mut vectors);

    let mut coefficients = Vec::with_capacity(t_grid.len());
    let mut df = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let mut row = Vec::with_capacity(values.len());
        row.push(1.0);
        let mut trace = 1.0;
        for &mu in &values[1..] {
            let c = 1.0 - exp_neg(t * mu);
            trace += c;
            row.push(c);
        }
        coefficients.push(row);
        df.push(trace);
    }
    Ok(SpectralDiagnostics {
        t: t_grid.to_vec(),
        values,
        vectors,
        coefficients,
        df,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::smoothing_spline_design;
    use crate::sim::triangle;

    fn spline_setup(n: usize, penalty: f64) -> (LearnerSystem, Vec<f64>, Vec<f64>) {
        let x: Vec<f64> = (0..n)
            .map(|i| -1.0 + 2.0 * (i as f64 + 0.5) / n as f64)
            .collect();
        let sys = smoothing_spline_design(&x, penalty).unwrap();
        let f: Vec<f64> = x.iter().map(|&xi| triangle(xi)).collect();
        (sys, x, f)
    }

    fn log_grid(lo: f64, hi: f64, k: usize) -> Vec<f64> {
        (0..k)
            .map(|i| (lo + (hi - lo) * i as f64 / (k - 1) as f64).exp())
            .collect()
    }

    #[test]
    fn constant_truth_without_noise_is_errorless() {
        let (sys, x, _) = spline_setup(10, 0.2);
        let f = vec![3.0; x.len()];
        let grid = [0.0, 1.0, 10.0];
        let train = expected_train_error(&sys, &f, 0.0, &grid, Init::Mean).unwrap();
        let test = expected_test_error_fixed(&sys, &f, 0.0, &grid, Init::Mean).unwrap();
        for row in 0..grid.len() {
            assert!(train.total()[row].abs() < 1e-20);
            assert!(test.total()[row].abs() < 1e-20);
        }
    }

    #[test]
    fn time_zero_decomposition() {
        let (sys, _, f) = spline_setup(12, 0.3);
        let n = 12.0;
        let sigma = 0.4;
        let fbar = mean(&f);
        let fnorm: f64 = f.iter().map(|v| (v - fbar) * (v - fbar)).sum();
        let train = expected_train_error(&sys, &f, sigma, &[0.0], Init::Mean).unwrap();
        assert!((train.bias2()[0] - fnorm / n).abs() < 1e-12);
        assert!((train.var()[0] - sigma * sigma * (n - 1.0) / n).abs() < 1e-12);
        let test = expected_test_error_fixed(&sys, &f, sigma, &[0.0], Init::Mean).unwrap();
        assert!((test.var()[0] - (sigma * sigma + sigma * sigma / n)).abs() < 1e-12);
        assert_eq!(test.noise_floor(), sigma * sigma + sigma * sigma / 12.0);
    }

    #[test]
    fn fixed_test_variance_saturates_at_twice_the_noise() {
        // Spectrum bounded away from zero: by t = 100 every direction has
        // fully moved, leaving in-sample noise + fresh noise.
        let n = 8;
        let diag = Matrix::from_fn(n, n, |i, j| {
            if i == j {
                0.5 + 0.5 * i as f64 / n as f64
            } else {
                0.0
            }
        })
        .unwrap()
        .tag_symmetric()
        .unwrap();
        let sys = LearnerSystem::synthetic(diag).unwrap();
        let f: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let sigma = 0.7;
        let curves = expected_test_error_fixed(&sys, &f, sigma, &[100.0], Init::Mean).unwrap();
        assert!((curves.var()[0] - 2.0 * sigma * sigma).abs() < 1e-6);
    }

    #[test]
    fn train_error_strictly_decreases() {
        let (sys, _, f) = spline_setup(20, 0.05);
        let grid = log_grid(-2.0, 4.0, 50);
        let curves = expected_train_error(&sys, &f, 0.5, &grid, Init::Mean).unwrap();
        for w in curves.total().windows(2) {
            assert!(w[1] < w[0], "total not strictly decreasing: {w:?}");
        }
    }

    #[test]
    fn fixed_test_shapes() {
        let (sys, _, f) = spline_setup(20, 0.05);
        let grid = log_grid(-2.0, 4.0, 40);
        let curves = expected_test_error_fixed(&sys, &f, 0.5, &grid, Init::Mean).unwrap();
        for w in curves.bias2().windows(2) {
            assert!(w[1] <= w[0] + 1e-14, "bias should decrease");
        }
        for w in curves.var().windows(2) {
            assert!(w[1] >= w[0] - 1e-14, "variance should not decrease");
        }
    }

    #[test]
    fn zero_initialization_never_beats_the_mean() {
        let (sys, x, _) = spline_setup(15, 0.2);
        // Truth with a clearly nonzero mean so the initializations differ.
        let f: Vec<f64> = x.iter().map(|&xi| 2.0 + triangle(xi)).collect();
        let grid = log_grid(-2.0, 3.0, 20);
        let sigma = 0.5;
        let train_mean = expected_train_error(&sys, &f, sigma, &grid, Init::Mean).unwrap();
        let train_zero = expected_train_error(&sys, &f, sigma, &grid, Init::Zero).unwrap();
        let test_mean = expected_test_error_fixed(&sys, &f, sigma, &grid, Init::Mean).unwrap();
        let test_zero = expected_test_error_fixed(&sys, &f, sigma, &grid, Init::Zero).unwrap();
        let mut strict = false;
        for i in 0..grid.len() {
            assert!(train_zero.total()[i] >= train_mean.total()[i] - 1e-12);
            assert!(test_zero.total()[i] >= test_mean.total()[i] - 1e-12);
            if train_zero.total()[i] > train_mean.total()[i] + 1e-9 {
                strict = true;
            }
        }
        assert!(strict, "zero init should cost strictly more somewhere");
    }

    #[test]
    fn finite_rate_curves_approach_the_limit() {
        let (sys, _, f) = spline_setup(15, 0.1);
        let grid = [1.0, 5.0];
        let sigma = 0.5;
        let limit = expected_train_error(&sys, &f, sigma, &grid, Init::Mean).unwrap();
        let mut previous = f64::INFINITY;
        for lambda in [0.5, 0.1, 0.02] {
            let discrete =
                expected_train_error_discrete(&sys, &f, sigma, lambda, &grid, Init::Mean).unwrap();
            let gap = discrete
                .total()
                .iter()
                .zip(limit.total())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0_f64, f64::max);
            assert!(gap < previous, "gap {gap} did not shrink at rate {lambda}");
            previous = gap;
        }
    }

    #[test]
    fn extrapolation_at_time_zero_is_truth_variance_plus_floor() {
        let (sys, _, _) = spline_setup(12, 0.2);
        let n = 12.0;
        let sigma = 0.3;
        // Deterministic replayable draw sequence.
        let draws: Vec<f64> = (0..400).map(|k| -1.0 + 2.0 * (k as f64 + 0.5) / 400.0).collect();
        let mut idx = 0;
        let mut sampler = move || {
            let v = draws[idx % draws.len()];
            idx += 1;
            v
        };
        let curves =
            expected_test_error_extrapolate(&sys, &triangle, sigma, &[0.0], &mut sampler, 400)
                .unwrap();
        let design: Vec<f64> = sys.design().to_vec();
        let fbar = mean(&design.iter().map(|&x| triangle(x)).collect::<Vec<_>>());
        let expect: f64 = (0..400)
            .map(|k| {
                let x = -1.0 + 2.0 * (k as f64 + 0.5) / 400.0;
                let d = triangle(x) - fbar;
                d * d
            })
            .sum::<f64>()
            / 400.0;
        let floor = (n + 1.0) / n * sigma * sigma;
        assert!((curves.total()[0] - (floor + expect)).abs() < 1e-12);
        assert_eq!(curves.noise_floor(), floor);
    }

    #[test]
    fn extrapolation_vanishes_for_constant_truth_without_noise() {
        let (sys, _, _) = spline_setup(10, 0.15);
        let constant = |_x: f64| 1.7;
        let mut k = 0usize;
        let mut sampler = move || {
            k += 1;
            -1.0 + 2.0 * ((k * 37) % 100) as f64 / 100.0
        };
        let curves =
            expected_test_error_extrapolate(&sys, &constant, 0.0, &[0.0, 2.0, 20.0], &mut sampler, 200)
                .unwrap();
        for v in curves.total() {
            assert!(v.abs() < 1e-18, "expected zero error, got {v}");
        }
    }

    #[test]
    fn extrapolation_rejects_negative_spectra() {
        let m = Matrix::from_fn(2, 2, |i, j| if i == j { if i == 0 { 1.0 } else { -0.5 } } else { 0.0 })
            .unwrap()
            .tag_symmetric()
            .unwrap();
        let sys = LearnerSystem::synthetic(m).unwrap();
        let mut sampler = || 0.0;
        let err = expected_test_error_extrapolate(&sys, &|_| 0.0, 0.1, &[1.0], &mut sampler, 10)
            .unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn diagnostics_start_as_pure_mean_fit() {
        let (sys, _, _) = spline_setup(10, 0.2);
        let diag = spectral_diagnostics(&sys, &[0.0, 1.0, 50.0]).unwrap();
        assert!((diag.df()[0] - 1.0).abs() < 1e-12);
        for &c in &diag.coefficients(0)[1..] {
            assert_eq!(c, 0.0);
        }
        assert_eq!(diag.coefficients(0)[0], 1.0);
        for w in diag.df().windows(2) {
            assert!(w[1] >= w[0]);
        }
    }

    #[test]
    fn diagnostics_df_matches_assembled_operator_trace() {
        let (sys, _, _) = spline_setup(9, 0.1);
        let t = 3.0;
        let diag = spectral_diagnostics(&sys, &[t]).unwrap();
        // Assemble the operator from the rotated basis and the coefficient
        // rule and compare traces.
        let n = 9;
        let mut trace = 0.0;
        for j in 0..n {
            let u = diag.vector(j);
            let c = diag.coefficients(0)[j];
            let diag_mass: f64 = u.iter().map(|ui| ui * ui).sum();
            trace += c * diag_mass;
        }
        assert!((trace - diag.df()[0]).abs() < 1e-9);
        assert!(diag.df()[0] > 1.0 && diag.df()[0] < 9.0);
    }

    #[test]
    fn unit_cluster_rotation_yields_constant_first_vector() {
        let (sys, _, _) = spline_setup(11, 0.25);
        let diag = spectral_diagnostics(&sys, &[1.0]).unwrap();
        let u1 = diag.vector(0);
        let expect = 1.0 / (11.0_f64).sqrt();
        for v in &u1 {
            assert!((v - expect).abs() < 1e-8, "first vector not constant: {v}");
        }
        // The next unit-cluster vector stays orthonormal.
        let u2 = diag.vector(1);
        let overlap: f64 = u1.iter().zip(&u2).map(|(a, b)| a * b).sum();
        assert!(overlap.abs() < 1e-10);
        let norm: f64 = u2.iter().map(|v| v * v).sum::<f64>();
        assert!((norm - 1.0).abs() < 1e-10);
    }

    #[test]
    fn synthetic_spectrum_saturates_to_full_freedom() {
        let n = 6;
        let m = Matrix::from_fn(n, n, |i, j| if i == j { 0.5 + 0.1 * i as f64 } else { 0.0 })
            .unwrap()
            .tag_symmetric()
            .unwrap();
        let sys = LearnerSystem::synthetic(m).unwrap();
        let diag = spectral_diagnostics(&sys, &[300.0]).unwrap();
        assert!((diag.df()[0] - n as f64).abs() < 1e-6);
    }

    #[test]
    fn centering_weights_sum_to_n_minus_one() {
        let (sys, _, f) = spline_setup(14, 0.3);
        let parts = error_parts(&sys, &f, Init::Mean).unwrap();
        let total: f64 = parts.noise_weight.iter().sum();
        assert!((total - 13.0).abs() < 1e-9);
    }
}
