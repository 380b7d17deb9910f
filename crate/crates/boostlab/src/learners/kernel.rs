use super::{BasisData, Dataset, LearnerKind, LearnerSystem};
use crate::linalg::Matrix;
use crate::{Error, Result};

/// Kernel shapes for the Nadaraya-Watson smoother.
///
/// Both are strictly positive on all of ℝ so that the normalising
/// denominator can only underflow, never be exactly zero by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    /// `exp(-u²/2)`; light tails, can underflow far from the data.
    Gaussian,
    /// The parabolic kernel `0.75 (1-u²)₊` lifted by an additive floor of
    /// `1e-12`, which keeps far-field weights positive (the raw kernel has
    /// compact support and would zero out the denominator).
    EpanechnikovRegularized,
}

impl Kernel {
    pub fn weight(self, u: f64) -> f64 {
        match self {
            Kernel::Gaussian => (-0.5 * u * u).exp(),
            Kernel::EpanechnikovRegularized => 0.75 * (1.0 - u * u).max(0.0) + 1e-12,
        }
    }
}

/// Kernel-smoother basis at one query point: normalized kernel weights.
pub(super) fn nw_basis_at(x: &[f64], bandwidth: f64, kernel: Kernel, q: f64) -> Result<Vec<f64>> {
    let mut weights: Vec<f64> = x
        .iter()
        .map(|&xj| kernel.weight((q - xj) / bandwidth))
        .collect();
    let denom: f64 = weights.iter().sum();
    if denom < 1e-300 {
        return Err(Error::invalid(format!(
            "all kernel weights underflowed at query point {q}; \
             increase the bandwidth (currently {bandwidth})"
        )));
    }
    for w in &mut weights {
        *w /= denom;
    }
    Ok(weights)
}

/// Nadaraya-Watson learner on a dataset's design points.
pub fn nadaraya_watson(data: &Dataset, bandwidth: f64, kernel: Kernel) -> Result<LearnerSystem> {
    nadaraya_watson_design(data.x(), bandwidth, kernel)
}

/// Nadaraya-Watson learner on raw design points.
///
/// Unlike [`Dataset`], a single design point is allowed: the smoother then
/// reproduces the one response everywhere. This entry point exists for
/// subsampled boosting, which refits on arbitrary design subsets.
pub fn nadaraya_watson_design(x: &[f64], bandwidth: f64, kernel: Kernel) -> Result<LearnerSystem> {
    if x.is_empty() {
        return Err(Error::invalid("kernel smoother needs at least one design point"));
    }
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::invalid(format!(
            "bandwidth must be finite and > 0, got {bandwidth}"
        )));
    }
    for w in x.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::invalid(format!(
                "design points must be strictly increasing, found {} then {}",
                w[0], w[1]
            )));
        }
    }
    let n = x.len();
    let mut s = Matrix::zeros(n, n);
    for i in 0..n {
        let row = nw_basis_at(x, bandwidth, kernel, x[i]).map_err(|e| match e {
            Error::InvalidInput(msg) => {
                Error::invalid(format!("design point {i}: {msg}"))
            }
            other => other,
        })?;
        for (j, v) in row.into_iter().enumerate() {
            s.set(i, j, v);
        }
    }
    LearnerSystem::from_parts(
        x.to_vec(),
        s,
        LearnerKind::NadarayaWatson { bandwidth, kernel },
        BasisData::Nw { bandwidth, kernel },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::stability_check;
    use crate::linalg::Stability;

    #[test]
    fn single_point_basis_is_constant_one() {
        let sys = nadaraya_watson_design(&[0.3], 0.5, Kernel::Gaussian).unwrap();
        assert_eq!(sys.influence().get(0, 0), 1.0);
        let g = sys.evaluate_basis(-2.0).unwrap();
        assert_eq!(g, vec![1.0]);
    }

    #[test]
    fn rows_are_convex_weights() {
        let x = vec![-0.8, -0.1, 0.2, 0.9];
        let sys = nadaraya_watson_design(&x, 0.4, Kernel::Gaussian).unwrap();
        let s = sys.influence();
        assert!(!s.is_symmetric());
        for i in 0..4 {
            let row = s.row(i);
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(row.iter().all(|&v| (0.0..=1.0).contains(&v)));
            // The diagonal weight dominates its own row.
            assert!(row.iter().all(|&v| v <= row[i] + 1e-15));
        }
    }

    #[test]
    fn basis_reproduces_influence_rows_at_design_points() {
        let x = vec![-1.0, -0.2, 0.4, 1.0];
        for kernel in [Kernel::Gaussian, Kernel::EpanechnikovRegularized] {
            let sys = nadaraya_watson_design(&x, 0.7, kernel).unwrap();
            for (i, &xi) in x.iter().enumerate() {
                let g = sys.evaluate_basis(xi).unwrap();
                for j in 0..4 {
                    assert!((g[j] - sys.influence().get(i, j)).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn gaussian_far_query_underflows_with_tiny_bandwidth() {
        let sys = nadaraya_watson_design(&[0.0, 0.001], 1e-5, Kernel::Gaussian).unwrap();
        // 1.0 is ~10^5 bandwidths away: every weight underflows to zero.
        assert!(sys.evaluate_basis(1.0).is_err());
        // The regularized kernel's floor keeps the same query finite.
        let reg =
            nadaraya_watson_design(&[0.0, 0.001], 1e-5, Kernel::EpanechnikovRegularized).unwrap();
        let g = reg.evaluate_basis(1.0).unwrap();
        assert!((g.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tiny_bandwidth_approaches_identity() {
        let x = vec![0.0, 0.4, 0.9, 1.5];
        let sys = nadaraya_watson_design(&x, 0.02, Kernel::Gaussian).unwrap();
        for i in 0..4 {
            assert!((sys.influence().get(i, i) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn kernel_smoother_dynamics_are_stable() {
        // Row-normalized Gaussian kernels are similar to a symmetric positive
        // matrix, so every eigenvalue real part is positive.
        let x: Vec<f64> = (0..12).map(|i| -1.0 + i as f64 / 6.0).collect();
        let sys = nadaraya_watson_design(&x, 0.3, Kernel::Gaussian).unwrap();
        assert_eq!(stability_check(sys.influence()).unwrap(), Stability::Stable);
    }

    #[test]
    fn invalid_bandwidth_rejected() {
        assert!(nadaraya_watson_design(&[0.0, 1.0], 0.0, Kernel::Gaussian).is_err());
        assert!(nadaraya_watson_design(&[0.0, 1.0], f64::NAN, Kernel::Gaussian).is_err());
        assert!(nadaraya_watson_design(&[], 1.0, Kernel::Gaussian).is_err());
    }
}
