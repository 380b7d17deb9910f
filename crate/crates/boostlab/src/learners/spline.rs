use super::{BasisData, Dataset, LearnerKind, LearnerSystem};
use crate::linalg::Matrix;
use crate::{Error, Result};

/// Natural cubic spline data for off-design evaluation: knot values and
/// knot curvatures (second derivatives) of every basis function.
///
/// Column `j` of `values` holds basis `j` at the knots (so `values` equals
/// the influence matrix); column `j` of `curvatures` holds its second
/// derivatives, zero in the first and last rows (natural end conditions).
/// Outside the knot range every basis continues linearly.
#[derive(Debug, Clone)]
pub(crate) struct SplineBasis {
    knots: Vec<f64>,
    values: Matrix,
    curvatures: Matrix,
}

impl SplineBasis {
    pub(super) fn eval_all(&self, q: f64) -> Vec<f64> {
        let x = &self.knots;
        let n = x.len();
        let v = &self.values;
        let c = &self.curvatures;

        if q <= x[0] {
            let h = x[1] - x[0];
            return (0..n)
                .map(|j| {
                    let slope = (v.get(1, j) - v.get(0, j)) / h - h * c.get(1, j) / 6.0;
                    v.get(0, j) + (q - x[0]) * slope
                })
                .collect();
        }
        if q >= x[n - 1] {
            let h = x[n - 1] - x[n - 2];
            return (0..n)
                .map(|j| {
                    let slope =
                        (v.get(n - 1, j) - v.get(n - 2, j)) / h + h * c.get(n - 2, j) / 6.0;
                    v.get(n - 1, j) + (q - x[n - 1]) * slope
                })
                .collect();
        }

        // x[k] <= q < x[k+1]
        let k = x.partition_point(|&xi| xi <= q) - 1;
        let h = x[k + 1] - x[k];
        let a = (x[k + 1] - q) / h;
        let b = (q - x[k]) / h;
        let ca = (a * a * a - a) * h * h / 6.0;
        let cb = (b * b * b - b) * h * h / 6.0;
        (0..n)
            .map(|j| {
                a * v.get(k, j) + b * v.get(k + 1, j) + ca * c.get(k, j) + cb * c.get(k + 1, j)
            })
            .collect()
    }
}

/// Assembles the smoothing-spline influence matrix and basis curvatures for
/// penalty `nu` by the banded second-difference system.
///
/// Returns `(S, curvatures)` with `S` untagged. The fitted values for
/// responses `y` are `S y = y - ν Q γ` where `(R + ν QᵀQ) γ = Qᵀ y`; the
/// band system is solved by an LDLᵀ factorization with half-bandwidth 2.
fn reinsch(x: &[f64], nu: f64) -> Result<(Matrix, Matrix)> {
    let n = x.len();
    let k = n - 2;
    let mut s = Matrix::identity(n);
    let mut curv = Matrix::zeros(n, n);
    if k == 0 {
        // Two points: any line interpolates with zero curvature penalty.
        return Ok((s, curv));
    }

    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();

    // Bands of M = R + ν QᵀQ (rows indexed by interior knots 1..n-1).
    let mut m0 = vec![0.0; k]; // diagonal
    let mut m1 = vec![0.0; k.saturating_sub(1)]; // first subdiagonal (c, c+1)
    let mut m2 = vec![0.0; k.saturating_sub(2)]; // second subdiagonal (c, c+2)
    for c in 0..k {
        let inv_a = 1.0 / h[c];
        let inv_b = 1.0 / h[c + 1];
        m0[c] = (h[c] + h[c + 1]) / 3.0
            + nu * (inv_a * inv_a + (inv_a + inv_b) * (inv_a + inv_b) + inv_b * inv_b);
    }
    for c in 0..k.saturating_sub(1) {
        let inv_a = 1.0 / h[c];
        let inv_b = 1.0 / h[c + 1];
        let inv_c = 1.0 / h[c + 2];
        m1[c] = h[c + 1] / 6.0 - nu * inv_b * (inv_a + 2.0 * inv_b + inv_c);
    }
    for c in 0..k.saturating_sub(2) {
        m2[c] = nu / (h[c + 1] * h[c + 2]);
    }

    // LDLᵀ factorization of the pentadiagonal system: for each row the
    // multipliers against rows i-1 and i-2 come first, then the pivot.
    let mut d = vec![0.0; k];
    let mut l1 = vec![0.0; k]; // L[i][i-1]
    let mut l2 = vec![0.0; k]; // L[i][i-2]
    for i in 0..k {
        if i >= 2 {
            l2[i] = m2[i - 2] / d[i - 2];
        }
        if i >= 1 {
            let mut num = m1[i - 1];
            if i >= 2 {
                num -= l2[i] * l1[i - 1] * d[i - 2];
            }
            l1[i] = num / d[i - 1];
        }
        let mut di = m0[i];
        if i >= 1 {
            di -= l1[i] * l1[i] * d[i - 1];
        }
        if i >= 2 {
            di -= l2[i] * l2[i] * d[i - 2];
        }
        if !(di > 0.0) || !di.is_finite() {
            return Err(Error::numeric(format!(
                "spline band system lost positive definiteness at row {i} (pivot {di:.3e}); \
                 the design may contain nearly coincident knots"
            )));
        }
        d[i] = di;
    }

    let solve = |b: &mut [f64]| {
        // L z = b
        for i in 0..k {
            if i >= 1 {
                b[i] -= l1[i] * b[i - 1];
            }
            if i >= 2 {
                b[i] -= l2[i] * b[i - 2];
            }
        }
        // D w = z
        for i in 0..k {
            b[i] /= d[i];
        }
        // Lᵀ γ = w
        for i in (0..k).rev() {
            if i + 1 < k {
                b[i] -= l1[i + 1] * b[i + 1];
            }
            if i + 2 < k {
                b[i] -= l2[i + 2] * b[i + 2];
            }
        }
    };

    // One band solve per unit response gives column j of S and its γ.
    let mut gamma = vec![0.0; k];
    for j in 0..n {
        for g in gamma.iter_mut() {
            *g = 0.0;
        }
        // Qᵀ e_j has up to three nonzero entries.
        if j >= 2 {
            gamma[j - 2] = 1.0 / h[j - 1];
        }
        if (1..=k).contains(&j) {
            gamma[j - 1] = -1.0 / h[j - 1] - 1.0 / h[j];
        }
        if j < k {
            gamma[j] = 1.0 / h[j];
        }
        solve(&mut gamma);

        // Column j of S: e_j - ν Q γ.
        for r in 0..n {
            let mut qg = 0.0;
            if r >= 2 && r - 2 < k {
                qg += gamma[r - 2] / h[r - 1];
            }
            if r >= 1 && r - 1 < k {
                qg -= gamma[r - 1] * (1.0 / h[r - 1] + 1.0 / h[r]);
            }
            if r < k {
                qg += gamma[r] / h[r];
            }
            let base = if r == j { 1.0 } else { 0.0 };
            s.set(r, j, base - nu * qg);
        }
        for (c, &g) in gamma.iter().enumerate() {
            curv.set(c + 1, j, g);
        }
    }
    Ok((s, curv))
}

fn validate_design(x: &[f64]) -> Result<()> {
    if x.len() < 2 {
        return Err(Error::invalid(format!(
            "smoothing spline needs at least 2 design points, got {}",
            x.len()
        )));
    }
    for w in x.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::invalid(format!(
                "spline knots must be strictly increasing, found {} then {}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

/// Natural cubic smoothing spline on a dataset's design points.
pub fn smoothing_spline(data: &Dataset, penalty: f64) -> Result<LearnerSystem> {
    smoothing_spline_design(data.x(), penalty)
}

/// Natural cubic smoothing spline on raw design points (used when refitting
/// on subsamples).
pub fn smoothing_spline_design(x: &[f64], penalty: f64) -> Result<LearnerSystem> {
    if !(penalty > 0.0 && penalty.is_finite()) {
        return Err(Error::invalid(format!(
            "spline penalty must be finite and > 0, got {penalty}"
        )));
    }
    validate_design(x)?;
    let (s, curv) = reinsch(x, penalty)?;
    let s = s.tag_symmetric()?;
    let basis = SplineBasis {
        knots: x.to_vec(),
        values: s.clone(),
        curvatures: curv,
    };
    LearnerSystem::from_parts(
        x.to_vec(),
        s,
        LearnerKind::SmoothingSpline { penalty },
        BasisData::Spline(basis),
    )
}

/// Finds the spline penalty whose trace (effective degrees of freedom)
/// matches `target_df`, by bisection on `log ν`.
///
/// The trace decreases monotonically from `n` (interpolation) to `2` (the
/// least-squares line) as `ν` grows, so any target in `(2, n]` is reachable.
/// Bisection starts on `log ν ∈ [-30, 30]`, widening up to three times per
/// side if the target sits outside the bracket, and stops once the trace is
/// within `1e-8` of the target (at most 200 iterations).
pub fn calibrate_df(data: &Dataset, target_df: f64) -> Result<(f64, LearnerSystem)> {
    validate_design(data.x())?;
    let n = data.n() as f64;
    if !(target_df > 2.0 && target_df <= n) {
        return Err(Error::invalid(format!(
            "target degrees of freedom {target_df} outside the achievable range (2, {n}]"
        )));
    }
    let x = data.x();
    let trace_at = |log_nu: f64| -> Result<f64> { Ok(reinsch(x, log_nu.exp())?.0.trace()) };

    let mut lo = -30.0; // small ν: trace near n
    let mut hi = 30.0; // large ν: trace near 2
    let mut tr_lo = trace_at(lo)?;
    let mut tr_hi = trace_at(hi)?;
    for _ in 0..3 {
        if target_df > tr_lo {
            lo -= 30.0;
            tr_lo = trace_at(lo)?;
        }
        if target_df < tr_hi {
            hi += 30.0;
            tr_hi = trace_at(hi)?;
        }
    }
    if target_df > tr_lo || target_df < tr_hi {
        return Err(Error::invalid(format!(
            "target degrees of freedom {target_df} unreachable; achievable range is \
             [{tr_hi:.6}, {tr_lo:.6}] for this design"
        )));
    }

    const TOL: f64 = 1e-8;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let tr = trace_at(mid)?;
        if (tr - target_df).abs() <= TOL {
            let nu = mid.exp();
            return Ok((nu, smoothing_spline_design(x, nu)?));
        }
        if tr > target_df {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::numeric(format!(
        "degrees-of-freedom bisection did not reach tolerance {TOL} within 200 iterations \
         for target {target_df}"
    )))
}
