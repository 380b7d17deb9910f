//! Synthetic regression data for experiments and tests.

use std::sync::Arc;

use crate::learners::Dataset;
use crate::rng::{standard_normal, stream, uniform_in, Domain};
use crate::Result;

/// Triangle wave on `[-1, 1]`: rises from 0 at `|x| = 0, 1` to 1 at
/// `|x| = 1/2`.
pub fn triangle(x: f64) -> f64 {
    1.0 - (2.0 * x.abs() - 1.0).abs()
}

/// Draws a sorted design `X ~ Unif[-1, 1]` with responses
/// `y = triangle(x) + ε`, `ε ~ N(0, sigma2)`.
///
/// Design points and noise come from separate seeded streams, so datasets
/// with the same seed but different noise levels share their design.
pub fn gen_dataset(n: usize, sigma2: f64, seed: u64) -> Result<Dataset> {
    let mut xs = stream(seed, Domain::DesignPoints, 0, 0);
    let mut es = stream(seed, Domain::Noise, 0, 0);
    let sigma = sigma2.sqrt();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let x = uniform_in(&mut xs, -1.0, 1.0);
            let y = triangle(x) + sigma * standard_normal(&mut es);
            (x, y)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    Dataset::new(x, y)?.with_truth(Arc::new(triangle), sigma)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_shape() {
        assert_eq!(triangle(0.0), 0.0);
        assert_eq!(triangle(0.5), 1.0);
        assert_eq!(triangle(-0.5), 1.0);
        assert_eq!(triangle(1.0), 0.0);
        assert_eq!(triangle(-1.0), 0.0);
        assert!((triangle(0.25) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn dataset_is_sorted_and_reproducible() {
        let a = gen_dataset(50, 0.25, 9).unwrap();
        let b = gen_dataset(50, 0.25, 9).unwrap();
        assert_eq!(a.x(), b.x());
        assert_eq!(a.y(), b.y());
        assert!(a.x().windows(2).all(|w| w[0] < w[1]));
        assert!(a.x().iter().all(|&x| (-1.0..=1.0).contains(&x)));
        assert!((a.sigma() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn same_seed_shares_design_across_noise_levels() {
        let quiet = gen_dataset(30, 0.01, 4).unwrap();
        let loud = gen_dataset(30, 1.0, 4).unwrap();
        assert_eq!(quiet.x(), loud.x());
        assert_ne!(quiet.y(), loud.y());
    }

    #[test]
    fn noiseless_responses_match_truth() {
        let data = gen_dataset(20, 0.0, 11).unwrap();
        let truth = data.truth_values().unwrap();
        for (yi, fi) in data.y().iter().zip(&truth) {
            assert!((yi - fi).abs() < 1e-15);
        }
    }
}
