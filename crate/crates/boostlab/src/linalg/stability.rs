use super::{general_eigenvalues, sym_eigen, Matrix};
use crate::Result;

/// Long-run behaviour of the limit weights `w_t` as `t → ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    /// `w_t` stays bounded for every response vector.
    Stable,
    /// Some response direction makes `w_t` diverge.
    Unstable,
    /// The spectrum touches the imaginary axis; boundedness then depends on
    /// Jordan structure, which is numerically ill-posed to resolve.
    Indeterminate,
}

/// Classifies the limit dynamics from the spectrum of `S`.
///
/// Symmetric matrices diagonalise, so a zero eigenvalue is harmless and the
/// verdict is `Stable` exactly when the smallest eigenvalue is above
/// `-1e-10`. For general matrices only eigenvalue real parts are available:
/// strictly positive spectra (beyond `1e-10`) are `Stable`, any real part
/// below `-1e-10` is `Unstable`, and real parts inside the tolerance band
/// give `Indeterminate` rather than guessing at defective eigenstructure.
pub fn stability_check(s: &Matrix) -> Result<Stability> {
    const TOL: f64 = 1e-10;
    if s.is_symmetric() {
        let eig = sym_eigen(s)?;
        let min = eig.values().last().copied().unwrap_or(0.0);
        return Ok(if min >= -TOL {
            Stability::Stable
        } else {
            Stability::Unstable
        });
    }
    let spectrum = general_eigenvalues(s)?;
    let mut all_positive = true;
    for (re, _) in &spectrum {
        if *re < -TOL {
            return Ok(Stability::Unstable);
        }
        if *re <= TOL {
            all_positive = false;
        }
    }
    Ok(if all_positive {
        Stability::Stable
    } else {
        Stability::Indeterminate
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_psd_is_stable() {
        let s = Matrix::from_rows(2, vec![1.0, 0.0, 0.0, 0.0])
            .unwrap()
            .tag_symmetric()
            .unwrap();
        assert_eq!(stability_check(&s).unwrap(), Stability::Stable);
    }

    #[test]
    fn symmetric_negative_eigenvalue_is_unstable() {
        let s = Matrix::from_rows(2, vec![1.0, 0.0, 0.0, -0.5])
            .unwrap()
            .tag_symmetric()
            .unwrap();
        assert_eq!(stability_check(&s).unwrap(), Stability::Unstable);
    }

    #[test]
    fn general_positive_spectrum_is_stable() {
        // Complex pair 0.6 ± 0.8i has positive real parts.
        let s = Matrix::from_rows(2, vec![0.6, -0.8, 0.8, 0.6]).unwrap();
        assert_eq!(stability_check(&s).unwrap(), Stability::Stable);
    }

    #[test]
    fn general_negative_real_part_is_unstable() {
        let s = Matrix::from_rows(2, vec![-0.2, 1.0, 0.0, 0.5]).unwrap();
        assert_eq!(stability_check(&s).unwrap(), Stability::Unstable);
    }

    #[test]
    fn nilpotent_touches_zero_and_is_indeterminate() {
        // Eigenvalues are exactly zero but the Jordan block makes w_t grow;
        // the classifier must refuse to call this stable.
        let s = Matrix::from_rows(2, vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(stability_check(&s).unwrap(), Stability::Indeterminate);
    }
}
