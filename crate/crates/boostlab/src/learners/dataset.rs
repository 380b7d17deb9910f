use crate::{Error, Result};
use std::fmt;
use std::sync::Arc;

/// A univariate regression sample: design points sorted strictly ascending,
/// responses, and optionally the generating truth.
///
/// Invariants enforced at construction: at least two design points, all
/// values finite, design strictly increasing (duplicate points would make
/// the learner bases collinear).
#[derive(Clone)]
pub struct Dataset {
    x: Vec<f64>,
    y: Vec<f64>,
    sigma: f64,
    f_true: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
}

impl fmt::Debug for Dataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Dataset")
            .field("n", &self.x.len())
            .field("sigma", &self.sigma)
            .field("has_truth", &self.f_true.is_some())
            .finish()
    }
}

impl Dataset {
    /// Builds a dataset from sorted design points and responses.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() < 2 {
            return Err(Error::invalid(format!(
                "a dataset needs at least 2 design points, got {}",
                x.len()
            )));
        }
        if x.len() != y.len() {
            return Err(Error::invalid(format!(
                "design and response lengths differ: {} vs {}",
                x.len(),
                y.len()
            )));
        }
        if let Some(v) = x.iter().chain(y.iter()).find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("dataset contains non-finite value {v}")));
        }
        for w in x.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::invalid(format!(
                    "design points must be strictly increasing, found {} then {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(Dataset {
            x,
            y,
            sigma: 0.0,
            f_true: None,
        })
    }

    /// Attaches the generating truth: the noiseless regression function and
    /// the noise standard deviation.
    pub fn with_truth(
        mut self,
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        sigma: f64,
    ) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::invalid(format!(
                "noise standard deviation must be finite and >= 0, got {sigma}"
            )));
        }
        self.f_true = Some(f);
        self.sigma = sigma;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Noise standard deviation; zero when no truth is attached.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn f_true(&self) -> Option<&(dyn Fn(f64) -> f64 + Send + Sync)> {
        self.f_true.as_deref()
    }

    /// The truth evaluated at the design points, if available.
    pub fn truth_values(&self) -> Option<Vec<f64>> {
        self.f_true
            .as_ref()
            .map(|f| self.x.iter().map(|&xi| f(xi)).collect())
    }

    pub fn y_mean(&self) -> f64 {
        crate::linalg::mean(&self.y)
    }

    pub fn y_range(&self) -> f64 {
        let min = self.y.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = self.y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        max - min
    }
}
