//! Boosting with subsampled base learners: uniform fixed-size subsets,
//! replicate simulation, the mean-field (subset-averaged) influence matrix,
//! and the closed-form variance bound on the randomized predictor.
//!
//! Every random object is a pure function of the master seed plus structural
//! indices (replicate, iteration, draw), so results are independent of
//! thread scheduling; replicate summaries are accumulated in fixed blocks
//! and merged in block order, making parallel runs bitwise equal to serial
//! ones.

use rand::Rng;
use rayon::prelude::*;

use crate::boosting::Init;
use crate::learners::{nadaraya_watson_design, smoothing_spline_design, Kernel, LearnerSystem};
use crate::linalg::{mean, norm_inf, Matrix};
use crate::rng::{stream, Domain};
use crate::{Error, Result};

/// Builds the deterministic base learner on an arbitrary design, typically a
/// subsample of the full one. The hyperparameters are fixed at construction
/// and reused for every rebuild.
pub trait LearnerFactory: Sync {
    fn build(&self, x: &[f64]) -> Result<LearnerSystem>;
}

/// Kernel-smoother factory with fixed bandwidth.
#[derive(Debug, Clone)]
pub struct NwFactory {
    pub bandwidth: f64,
    pub kernel: Kernel,
}

impl LearnerFactory for NwFactory {
    fn build(&self, x: &[f64]) -> Result<LearnerSystem> {
        nadaraya_watson_design(x, self.bandwidth, self.kernel)
    }
}

/// Smoothing-spline factory with fixed penalty.
#[derive(Debug, Clone)]
pub struct SplineFactory {
    pub penalty: f64,
}

impl LearnerFactory for SplineFactory {
    fn build(&self, x: &[f64]) -> Result<LearnerSystem> {
        smoothing_spline_design(x, self.penalty)
    }
}

/// Deterministic generator of uniform fixed-size subsets of `{0..n}`.
///
/// Subset size is `⌊rate·n⌋`. Each `(replicate, iteration)` pair gets its
/// own generator stream, so draws are independent across iterations and
/// reproducible regardless of evaluation order.
#[derive(Debug, Clone)]
pub struct SubsamplePlan {
    n: usize,
    rate: f64,
    size: usize,
    seed: u64,
}

impl SubsamplePlan {
    pub fn new(n: usize, rate: f64, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("subsampling needs at least one point"));
        }
        if !(rate > 0.0 && rate <= 1.0) {
            return Err(Error::invalid(format!(
                "subsampling rate must lie in (0, 1], got {rate}"
            )));
        }
        let size = ((rate * n as f64).floor() as usize).max(1);
        Ok(SubsamplePlan { n, rate, size, seed })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// Number of indices per draw, `⌊rate·n⌋`.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The subset used by `replicate` at boosting step `iteration`, sorted
    /// ascending. A partial Fisher-Yates shuffle keeps every size-k subset
    /// equally likely.
    pub fn draw(&self, replicate: u64, iteration: u64) -> Vec<usize> {
        let mut rng = stream(self.seed, Domain::Subsample, replicate, iteration);
        self.draw_from(&mut rng)
    }

    /// A subset for the `draw_index`-th mean-field sample, from a stream
    /// disjoint from the replicate paths.
    fn draw_mean_field(&self, draw_index: u64) -> Vec<usize> {
        let mut rng = stream(self.seed, Domain::MeanField, draw_index, 0);
        self.draw_from(&mut rng)
    }

    fn draw_from(&self, rng: &mut rand_chacha::ChaCha8Rng) -> Vec<usize> {
        let mut pool: Vec<usize> = (0..self.n).collect();
        for i in 0..self.size {
            let j = rng.gen_range(i..self.n);
            pool.swap(i, j);
        }
        let mut subset = pool[..self.size].to_vec();
        subset.sort_unstable();
        subset
    }
}

fn validate_subset(n: usize, subset: &[usize]) -> Result<()> {
    if subset.is_empty() {
        return Err(Error::invalid("subset must be nonempty"));
    }
    for w in subset.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::invalid(
                "subset indices must be strictly increasing",
            ));
        }
    }
    if *subset.last().expect("nonempty") >= n {
        return Err(Error::invalid(format!(
            "subset index {} out of range for n = {n}",
            subset.last().expect("nonempty")
        )));
    }
    Ok(())
}

/// Basis of the learner rebuilt on the subsample, scattered back to full
/// length: position `j` holds `g_j(query, ξ)` for `j ∈ ξ` and 0 elsewhere.
pub fn randomized_basis(
    factory: &dyn LearnerFactory,
    x: &[f64],
    subset: &[usize],
    query: f64,
) -> Result<Vec<f64>> {
    validate_subset(x.len(), subset)?;
    let x_sub: Vec<f64> = subset.iter().map(|&j| x[j]).collect();
    let sys = factory.build(&x_sub)?;
    let local = sys.evaluate_basis(query)?;
    let mut full = vec![0.0; x.len()];
    for (slot, &j) in subset.iter().enumerate() {
        full[j] = local[slot];
    }
    Ok(full)
}

/// How to average over the subset distribution.
#[derive(Debug, Clone, Copy)]
pub enum MeanFieldMode {
    /// Visit every subset once; exact, only for small `C(n, k)`.
    ExactEnumeration,
    /// Average this many independent subset draws.
    MonteCarlo(usize),
}

fn binomial_count(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut c = 1.0_f64;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
        if c > 1e15 {
            return c; // far beyond any enumeration budget
        }
    }
    c
}

fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] != i + n - k {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// First and second moments of the scattered basis over the subset
/// distribution, evaluated at `points`: entry `(p, i)` of the first matrix
/// is `E_ξ[g_i(points[p], ξ)]`, of the second `E_ξ[g_i(points[p], ξ)²]`.
fn subsample_moments(
    factory: &dyn LearnerFactory,
    x: &[f64],
    plan: &SubsamplePlan,
    mode: MeanFieldMode,
    points: &[f64],
) -> Result<(Matrix, Matrix)> {
    if plan.n() != x.len() {
        return Err(Error::invalid(format!(
            "plan is for n = {} but the design has {} points",
            plan.n(),
            x.len()
        )));
    }
    let n = x.len();
    let np = points.len();

    // One subset's contribution, accumulated in place.
    let accumulate = |subset: &[usize],
                      mean_acc: &mut Matrix,
                      sq_acc: &mut Matrix|
     -> Result<()> {
        let x_sub: Vec<f64> = subset.iter().map(|&j| x[j]).collect();
        let sys = factory.build(&x_sub)?;
        for (p, &q) in points.iter().enumerate() {
            let local = sys.evaluate_basis(q)?;
            for (slot, &j) in subset.iter().enumerate() {
                let g = local[slot];
                mean_acc.set(p, j, mean_acc.get(p, j) + g);
                sq_acc.set(p, j, sq_acc.get(p, j) + g * g);
            }
        }
        Ok(())
    };

    match mode {
        MeanFieldMode::ExactEnumeration => {
            let count = binomial_count(n, plan.size());
            if count > 1e6 {
                return Err(Error::invalid(format!(
                    "enumerating {count:.3e} subsets exceeds the 1e6 budget; \
                     use Monte Carlo averaging instead"
                )));
            }
            let mut mean_acc = Matrix::zeros(np, n);
            let mut sq_acc = Matrix::zeros(np, n);
            let mut subset: Vec<usize> = (0..plan.size()).collect();
            let mut visited = 0u64;
            loop {
                accumulate(&subset, &mut mean_acc, &mut sq_acc)?;
                visited += 1;
                if !next_combination(&mut subset, n) {
                    break;
                }
            }
            let w = 1.0 / visited as f64;
            mean_acc.scale(w);
            sq_acc.scale(w);
            Ok((mean_acc, sq_acc))
        }
        MeanFieldMode::MonteCarlo(draws) => {
            if draws == 0 {
                return Err(Error::invalid("Monte Carlo averaging needs draws >= 1"));
            }
            const BLOCK: usize = 512;
            let blocks = draws.div_ceil(BLOCK);
            let partials: Vec<(Matrix, Matrix)> = (0..blocks)
                .into_par_iter()
                .map(|b| {
                    let mut mean_acc = Matrix::zeros(np, n);
                    let mut sq_acc = Matrix::zeros(np, n);
                    let lo = b * BLOCK;
                    let hi = ((b + 1) * BLOCK).min(draws);
                    for d in lo..hi {
                        let subset = plan.draw_mean_field(d as u64);
                        accumulate(&subset, &mut mean_acc, &mut sq_acc)?;
                    }
                    Ok((mean_acc, sq_acc))
                })
                .collect::<Result<Vec<_>>>()?;
            let mut mean_acc = Matrix::zeros(np, n);
            let mut sq_acc = Matrix::zeros(np, n);
            for (pm, ps) in partials {
                mean_acc = mean_acc.add_scaled(1.0, &pm);
                sq_acc = sq_acc.add_scaled(1.0, &ps);
            }
            let w = 1.0 / draws as f64;
            mean_acc.scale(w);
            sq_acc.scale(w);
            Ok((mean_acc, sq_acc))
        }
    }
}

/// The subset-averaged influence matrix at the design points: entry
/// `(i, j)` is `E_ξ[g_j(x_i, ξ)]`. Governs the mean dynamics of the
/// randomized recursion.
pub fn mean_field_matrix(
    factory: &dyn LearnerFactory,
    x: &[f64],
    plan: &SubsamplePlan,
    mode: MeanFieldMode,
) -> Result<Matrix> {
    Ok(subsample_moments(factory, x, plan, mode, x)?.0)
}

/// Subset-averaged basis at arbitrary points: entry `(p, i)` is
/// `E_ξ[g_i(points[p], ξ)]`. Row `p` extends the mean-field matrix to the
/// point `points[p]`.
pub fn mean_field_basis(
    factory: &dyn LearnerFactory,
    x: &[f64],
    plan: &SubsamplePlan,
    mode: MeanFieldMode,
    points: &[f64],
) -> Result<Matrix> {
    Ok(subsample_moments(factory, x, plan, mode, points)?.0)
}

/// One update of the randomized recursion, in place.
///
/// `state` holds the current predictor values at the design points followed
/// by the query points (`x.len() + queries.len()` entries). The learner is
/// rebuilt on `subset`, fitted to the current residuals there, and every
/// state entry moves by `λ` times that fit.
pub fn stochastic_step(
    factory: &dyn LearnerFactory,
    x: &[f64],
    y: &[f64],
    queries: &[f64],
    state: &mut [f64],
    lambda: f64,
    subset: &[usize],
) -> Result<()> {
    let mut points = Vec::with_capacity(x.len() + queries.len());
    points.extend_from_slice(x);
    points.extend_from_slice(queries);
    step_at_points(factory, x, y, &points, state, lambda, subset)
}

fn step_at_points(
    factory: &dyn LearnerFactory,
    x: &[f64],
    y: &[f64],
    points: &[f64],
    state: &mut [f64],
    lambda: f64,
    subset: &[usize],
) -> Result<()> {
    validate_subset(x.len(), subset)?;
    if state.len() != points.len() {
        return Err(Error::invalid(format!(
            "state length {} does not match {} evaluation points",
            state.len(),
            points.len()
        )));
    }
    let x_sub: Vec<f64> = subset.iter().map(|&j| x[j]).collect();
    let sys = factory.build(&x_sub)?;
    let resid: Vec<f64> = subset.iter().map(|&j| y[j] - state[j]).collect();
    let updates: Vec<f64> = points
        .iter()
        .map(|&q| {
            let local = sys.evaluate_basis(q)?;
            Ok(local.iter().zip(&resid).map(|(g, r)| g * r).sum::<f64>())
        })
        .collect::<Result<Vec<f64>>>()?;
    for (s, u) in state.iter_mut().zip(&updates) {
        *s += lambda * u;
    }
    Ok(())
}

/// Replicate summaries of the randomized recursion: empirical mean and
/// variance of the predictor at every checkpoint `m = 0..=m_max` and every
/// evaluation point (design points first, then queries).
#[derive(Debug, Clone)]
pub struct StochasticRun {
    lambda: f64,
    replicates: usize,
    n_design: usize,
    points: Vec<f64>,
    mean: Vec<Vec<f64>>,
    var: Vec<Vec<f64>>,
}

impl StochasticRun {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn replicates(&self) -> usize {
        self.replicates
    }

    pub fn m_max(&self) -> usize {
        self.mean.len() - 1
    }

    /// Evaluation points: the design, then the queries.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn n_design(&self) -> usize {
        self.n_design
    }

    /// Empirical mean of the predictor at checkpoint `m`, per point.
    pub fn mean(&self, m: usize) -> &[f64] {
        &self.mean[m]
    }

    /// Unbiased empirical variance at checkpoint `m`, per point (0 when a
    /// single replicate was run).
    pub fn var(&self, m: usize) -> &[f64] {
        &self.var[m]
    }
}

/// Runs `replicates` independent paths of the randomized recursion and
/// summarizes them.
///
/// Blocks of replicates are simulated in parallel; each block accumulates
/// its paths in replicate order and blocks are merged in index order, so the
/// summaries do not depend on the number of threads.
pub fn stochastic_boost(
    factory: &dyn LearnerFactory,
    plan: &SubsamplePlan,
    x: &[f64],
    y: &[f64],
    lambda: f64,
    m_max: usize,
    replicates: usize,
    queries: &[f64],
) -> Result<StochasticRun> {
    if plan.n() != x.len() || y.len() != x.len() {
        return Err(Error::invalid(format!(
            "design ({}), responses ({}) and plan ({}) disagree on n",
            x.len(),
            y.len(),
            plan.n()
        )));
    }
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::invalid(format!(
            "stochastic boosting needs a learning rate in (0, 1), got {lambda}"
        )));
    }
    if replicates == 0 {
        return Err(Error::invalid("need at least one replicate"));
    }
    if let Some(bad) = y.iter().chain(queries).find(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("non-finite input value {bad}")));
    }

    let mut points = Vec::with_capacity(x.len() + queries.len());
    points.extend_from_slice(x);
    points.extend_from_slice(queries);
    let np = points.len();
    let ybar = mean(y);
    let rows = m_max + 1;

    const BLOCK: usize = 64;
    let blocks = replicates.div_ceil(BLOCK);
    let partials: Vec<(Vec<Vec<f64>>, Vec<Vec<f64>>)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut sum = vec![vec![0.0; np]; rows];
            let mut sumsq = vec![vec![0.0; np]; rows];
            let lo = b * BLOCK;
            let hi = ((b + 1) * BLOCK).min(replicates);
            for r in lo..hi {
                let mut state = vec![ybar; np];
                for (p, &v) in state.iter().enumerate() {
                    sum[0][p] += v;
                    sumsq[0][p] += v * v;
                }
                for m in 0..m_max {
                    let subset = plan.draw(r as u64, m as u64);
                    step_at_points(factory, x, y, &points, &mut state, lambda, &subset)?;
                    for (p, &v) in state.iter().enumerate() {
                        sum[m + 1][p] += v;
                        sumsq[m + 1][p] += v * v;
                    }
                }
            }
            Ok((sum, sumsq))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut sum = vec![vec![0.0; np]; rows];
    let mut sumsq = vec![vec![0.0; np]; rows];
    for (bs, bq) in partials {
        for m in 0..rows {
            for p in 0..np {
                sum[m][p] += bs[m][p];
                sumsq[m][p] += bq[m][p];
            }
        }
    }

    let rf = replicates as f64;
    let mean_rows: Vec<Vec<f64>> = sum
        .iter()
        .map(|row| row.iter().map(|s| s / rf).collect())
        .collect();
    let var_rows: Vec<Vec<f64>> = sum
        .iter()
        .zip(&sumsq)
        .map(|(srow, qrow)| {
            srow.iter()
                .zip(qrow)
                .map(|(s, q)| {
                    if replicates < 2 {
                        0.0
                    } else {
                        ((q - s * s / rf) / (rf - 1.0)).max(0.0)
                    }
                })
                .collect()
        })
        .collect();

    Ok(StochasticRun {
        lambda,
        replicates,
        n_design: x.len(),
        points,
        mean: mean_rows,
        var: var_rows,
    })
}

/// Deterministic path of the mean dynamics: the recursion run with the
/// subset-averaged influence matrix, evaluated through an averaged basis.
///
/// `s_bar` is the mean-field matrix at the design points; `gbar` holds the
/// averaged basis at the evaluation points (row per point; pass `s_bar`
/// itself to evaluate at the design). Returns one row per checkpoint
/// `m = 0..=m_max`.
pub fn analytic_mean_path(
    s_bar: &Matrix,
    gbar: &Matrix,
    y: &[f64],
    lambda: f64,
    m_max: usize,
) -> Result<Vec<Vec<f64>>> {
    let n = y.len();
    if s_bar.rows() != n || s_bar.cols() != n {
        return Err(Error::invalid(format!(
            "mean-field matrix is {}x{}, expected {n}x{n}",
            s_bar.rows(),
            s_bar.cols()
        )));
    }
    if gbar.cols() != n {
        return Err(Error::invalid(format!(
            "averaged basis has {} columns, expected {n}",
            gbar.cols()
        )));
    }
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::invalid(format!(
            "learning rate must lie in (0, 1], got {lambda}"
        )));
    }
    let (ybar, tilde) = Init::Mean.split(y);
    let np = gbar.rows();
    let mut w = vec![0.0; n];
    let mut out = Vec::with_capacity(m_max + 1);
    for m in 0..=m_max {
        if m > 0 {
            let sw = s_bar.matvec(&w);
            for i in 0..n {
                w[i] += lambda * (tilde[i] - sw[i]);
            }
        }
        let gw = gbar.matvec(&w);
        out.push((0..np).map(|p| ybar + gw[p]).collect());
    }
    Ok(out)
}

/// The closed-form bound constants: maximal averaged row mass, maximal
/// summed subset variance, and the combined constant
/// `K = 2·M1 + M1² + (n+1)·M2`.
#[derive(Debug, Clone, Copy)]
pub struct BoundConstants {
    pub m1: f64,
    pub m2: f64,
    pub k: f64,
}

/// Result of auditing replicate variances against the closed-form bound.
#[derive(Debug, Clone)]
pub struct VarianceAudit {
    constants: BoundConstants,
    bound: f64,
    means: Vec<f64>,
    empirical: Vec<f64>,
    all_within: bool,
}

impl VarianceAudit {
    pub fn constants(&self) -> BoundConstants {
        self.constants
    }

    /// Bound on the predictor variance after `m` steps, valid at every
    /// audited point.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// Empirical replicate means per evaluation point (design points first,
    /// then queries), from the same paths the variances came from.
    pub fn means(&self) -> &[f64] {
        &self.means
    }

    /// Empirical replicate variances per evaluation point (design points
    /// first, then queries).
    pub fn empirical(&self) -> &[f64] {
        &self.empirical
    }

    pub fn all_within(&self) -> bool {
        self.all_within
    }
}

/// Evaluates the variance bound after `m` steps and compares it against
/// `replicates` simulated paths at the design and query points.
///
/// The moment constants are averaged over the subset distribution in the
/// given mode; the maxima run over the design points and every query point.
#[allow(clippy::too_many_arguments)]
pub fn variance_bound(
    factory: &dyn LearnerFactory,
    plan: &SubsamplePlan,
    x: &[f64],
    y: &[f64],
    lambda: f64,
    m: usize,
    queries: &[f64],
    replicates: usize,
    mode: MeanFieldMode,
) -> Result<VarianceAudit> {
    let mut points = Vec::with_capacity(x.len() + queries.len());
    points.extend_from_slice(x);
    points.extend_from_slice(queries);
    let (first, second) = subsample_moments(factory, x, plan, mode, &points)?;

    let n = x.len();
    let mut m1 = 0.0_f64;
    let mut m2 = 0.0_f64;
    for p in 0..points.len() {
        let mass: f64 = (0..n).map(|i| first.get(p, i).abs()).sum();
        let varsum: f64 = (0..n)
            .map(|i| (second.get(p, i) - first.get(p, i) * first.get(p, i)).max(0.0))
            .sum();
        m1 = m1.max(mass);
        m2 = m2.max(varsum);
    }
    let k = 2.0 * m1 + m1 * m1 + (n as f64 + 1.0) * m2;

    // ‖S̄‖_∞ over the design rows only.
    let mut sbar_norm = 0.0_f64;
    for p in 0..n {
        let mass: f64 = (0..n).map(|i| first.get(p, i).abs()).sum();
        sbar_norm = sbar_norm.max(mass);
    }

    let tilde = Init::Mean.split(y).1;
    let ytilde_inf = norm_inf(&tilde);
    let mf = m as f64;
    let growth = (1.0 + k * lambda).powi(i32::try_from(m).map_err(|_| {
        Error::invalid(format!("iteration count {m} too large for the bound"))
    })?);
    let drift = lambda * mf * k;
    let bound = k
        * (mf + 1.0)
        * lambda
        * lambda
        * growth
        * n as f64
        * ytilde_inf
        * ytilde_inf
        * (1.0 + drift * drift * (2.0 * lambda * mf * sbar_norm).exp());

    let run = stochastic_boost(factory, plan, x, y, lambda, m, replicates, queries)?;
    let means = run.mean(m).to_vec();
    let empirical = run.var(m).to_vec();
    let all_within = empirical.iter().all(|&v| v <= bound);
    Ok(VarianceAudit {
        constants: BoundConstants { m1, m2, k },
        bound,
        means,
        empirical,
        all_within,
    })
}
