use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "boostlab",
    version,
    about = "Linear boosting experiments: fitted curves, error laws, spectra, \
             smoothed projections, and subsampled runs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub verb: Verb,
    #[command(flatten)]
    pub opts: GlobalOpts,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verb {
    /// Fitted curves on a query grid at several stopping times, with an SVG overlay
    Fit,
    /// Expected train/test error curves per learning rate and in the rate-zero limit
    Errors,
    /// Learner spectrum plus leading and trailing eigenvectors
    Eigen,
    /// Smoothed-projection coefficients and degrees of freedom at chosen times
    Project,
    /// Subsampled boosting: empirical vs analytic means and the variance-bound audit
    Stochastic,
}

#[derive(Args, Debug, Default)]
pub struct GlobalOpts {
    /// Flat `key = value` config file; command-line flags win over it
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Master seed (falls back to the BOOSTLAB_SEED environment variable)
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output directory for CSV and SVG files
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Number of design points
    #[arg(long, global = true)]
    pub n: Option<usize>,

    /// Noise variance of the simulated responses
    #[arg(long, global = true)]
    pub sigma2: Option<f64>,

    /// Target degrees of freedom for the smoothing spline
    #[arg(long, global = true)]
    pub df: Option<f64>,

    /// Comma-separated learning rates, e.g. "1,0.5,0.1"
    #[arg(long, global = true, value_name = "LIST")]
    pub lambdas: Option<String>,

    /// Stopping-time grid: "logspace:a:b:k" (k points, ln t from a to b)
    /// or "list:v1,v2,..."
    #[arg(long = "t-grid", global = true, value_name = "GRID")]
    pub t_grid: Option<String>,

    /// Subset fraction for the subsampled learner
    #[arg(long = "subsample-rate", global = true)]
    pub subsample_rate: Option<f64>,

    /// Monte Carlo replicate count (covariate draws, subset draws, paths)
    #[arg(long = "mc-replicates", global = true)]
    pub mc_replicates: Option<usize>,
}
