//! Experiment configuration: defaults, the flat `key = value` config file,
//! and the layering rule (flags over file over `BOOSTLAB_SEED` over
//! defaults).

use std::path::{Path, PathBuf};

use crate::{CliError, GlobalOpts};

/// Seed used when neither flag, config file, nor environment provides one.
pub const DEFAULT_SEED: u64 = 1729;

/// Stopping-time grid, parsed from `logspace:a:b:k` or `list:v1,v2,...`.
#[derive(Debug, Clone, PartialEq)]
pub enum TGridSpec {
    /// `k` points whose natural logs are equally spaced between `a` and `b`.
    Logspace { a: f64, b: f64, k: usize },
    /// Explicit values.
    List(Vec<f64>),
}

impl TGridSpec {
    /// Parses `"logspace:a:b:k"` or `"list:v1,v2,..."`.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        if let Some(rest) = text.strip_prefix("logspace:") {
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.len() != 3 {
                return Err(CliError::usage(format!(
                    "--t-grid logspace needs the form logspace:a:b:k, got {text:?}"
                )));
            }
            let a = parse_f64(parts[0], "--t-grid")?;
            let b = parse_f64(parts[1], "--t-grid")?;
            let k: usize = parts[2]
                .parse()
                .map_err(|_| CliError::usage(format!("--t-grid point count {:?} is not an integer", parts[2])))?;
            if !(a.is_finite() && b.is_finite() && a <= b) {
                return Err(CliError::usage(format!(
                    "--t-grid logspace needs finite a <= b, got a={a}, b={b}"
                )));
            }
            if k == 0 || k > 100_000 {
                return Err(CliError::usage(format!(
                    "--t-grid point count must lie in 1..=100000, got {k}"
                )));
            }
            Ok(TGridSpec::Logspace { a, b, k })
        } else if let Some(rest) = text.strip_prefix("list:") {
            let values: Vec<f64> = rest
                .split(',')
                .map(|v| parse_f64(v, "--t-grid"))
                .collect::<Result<_, _>>()?;
            if values.is_empty() {
                return Err(CliError::usage("--t-grid list must not be empty"));
            }
            if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return Err(CliError::usage(format!(
                    "--t-grid values must be finite and >= 0, got {bad}"
                )));
            }
            Ok(TGridSpec::List(values))
        } else {
            Err(CliError::usage(format!(
                "--t-grid must start with \"logspace:\" or \"list:\", got {text:?}"
            )))
        }
    }

    /// Concrete grid: ascending, exact duplicates removed.
    pub fn resolve(&self) -> Vec<f64> {
        let mut values = match self {
            TGridSpec::Logspace { a, b, k } => {
                if *k == 1 {
                    vec![a.exp()]
                } else {
                    (0..*k)
                        .map(|i| (a + (b - a) * i as f64 / (*k - 1) as f64).exp())
                        .collect()
                }
            }
            TGridSpec::List(values) => values.clone(),
        };
        values.sort_by(f64::total_cmp);
        values.dedup();
        values
    }
}

fn parse_f64(text: &str, what: &str) -> Result<f64, CliError> {
    text.trim()
        .parse()
        .map_err(|_| CliError::usage(format!("{what}: {text:?} is not a number")))
}

fn parse_lambdas(text: &str) -> Result<Vec<f64>, CliError> {
    let values: Vec<f64> = text
        .split(',')
        .map(|v| parse_f64(v, "--lambdas"))
        .collect::<Result<_, _>>()?;
    if values.is_empty() {
        return Err(CliError::usage("--lambdas must not be empty"));
    }
    for &lam in &values {
        if !(lam > 0.0 && lam <= 1.0) {
            return Err(CliError::usage(format!(
                "--lambdas entries must lie in (0, 1], got {lam}"
            )));
        }
    }
    Ok(values)
}

/// Fully resolved experiment parameters shared by every command.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub n: usize,
    pub sigma2: f64,
    pub df_target: f64,
    pub seed: u64,
    pub t_grid: Option<TGridSpec>,
    pub lambdas: Vec<f64>,
    pub subsample_rate: f64,
    pub mc_replicates: usize,
    pub query_points: usize,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 100,
            sigma2: 0.25,
            df_target: 5.0,
            seed: DEFAULT_SEED,
            t_grid: None,
            lambdas: vec![1.0, 0.5, 0.1],
            subsample_rate: 0.5,
            mc_replicates: 10_000,
            query_points: 512,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    /// Builds the configuration in priority order: defaults, then the
    /// `BOOSTLAB_SEED` environment value, then the config file, then flags.
    pub fn assemble(flags: &GlobalOpts, env_seed: Option<&str>) -> Result<Self, CliError> {
        let mut cfg = ExperimentConfig::default();
        if let Some(text) = env_seed {
            cfg.seed = text.trim().parse().map_err(|_| {
                CliError::usage(format!("BOOSTLAB_SEED must be an unsigned integer, got {text:?}"))
            })?;
        }
        if let Some(path) = &flags.config {
            cfg.apply_file(path)?;
        }
        cfg.apply_flags(flags)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::usage(format!(
                    "{}:{}: expected key = value, got {raw:?}",
                    path.display(),
                    lineno + 1
                ))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let at = |msg: String| CliError::usage(format!("{}:{}: {msg}", path.display(), lineno + 1));
            match key {
                "n" => self.n = value.parse().map_err(|_| at(format!("n: {value:?} is not an integer")))?,
                "sigma2" => self.sigma2 = parse_f64(value, "sigma2").map_err(|e| at(e.to_string()))?,
                "df" => self.df_target = parse_f64(value, "df").map_err(|e| at(e.to_string()))?,
                "seed" => {
                    self.seed = value
                        .parse()
                        .map_err(|_| at(format!("seed: {value:?} is not an unsigned integer")))?
                }
                "lambdas" => self.lambdas = parse_lambdas(value).map_err(|e| at(e.to_string()))?,
                "t_grid" => self.t_grid = Some(TGridSpec::parse(value).map_err(|e| at(e.to_string()))?),
                "subsample_rate" => {
                    self.subsample_rate = parse_f64(value, "subsample_rate").map_err(|e| at(e.to_string()))?
                }
                "mc_replicates" => {
                    self.mc_replicates = value
                        .parse()
                        .map_err(|_| at(format!("mc_replicates: {value:?} is not an integer")))?
                }
                "query_points" => {
                    self.query_points = value
                        .parse()
                        .map_err(|_| at(format!("query_points: {value:?} is not an integer")))?
                }
                "out" => self.out_dir = PathBuf::from(value),
                other => {
                    return Err(at(format!(
                        "unknown config key {other:?} (known: n, sigma2, df, seed, lambdas, \
                         t_grid, subsample_rate, mc_replicates, query_points, out)"
                    )))
                }
            }
        }
        Ok(())
    }

    fn apply_flags(&mut self, flags: &GlobalOpts) -> Result<(), CliError> {
        if let Some(n) = flags.n {
            self.n = n;
        }
        if let Some(s2) = flags.sigma2 {
            self.sigma2 = s2;
        }
        if let Some(df) = flags.df {
            self.df_target = df;
        }
        if let Some(seed) = flags.seed {
            self.seed = seed;
        }
        if let Some(text) = &flags.lambdas {
            self.lambdas = parse_lambdas(text)?;
        }
        if let Some(text) = &flags.t_grid {
            self.t_grid = Some(TGridSpec::parse(text)?);
        }
        if let Some(rate) = flags.subsample_rate {
            self.subsample_rate = rate;
        }
        if let Some(reps) = flags.mc_replicates {
            self.mc_replicates = reps;
        }
        if let Some(out) = &flags.out {
            self.out_dir = out.clone();
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.n < 2 {
            return Err(CliError::usage(format!("--n must be at least 2, got {}", self.n)));
        }
        if !(self.sigma2.is_finite() && self.sigma2 >= 0.0) {
            return Err(CliError::usage(format!(
                "--sigma2 must be finite and >= 0, got {}",
                self.sigma2
            )));
        }
        if !(self.df_target.is_finite() && self.df_target > 0.0) {
            return Err(CliError::usage(format!(
                "--df must be finite and positive, got {}",
                self.df_target
            )));
        }
        if !(self.subsample_rate > 0.0 && self.subsample_rate <= 1.0) {
            return Err(CliError::usage(format!(
                "--subsample-rate must lie in (0, 1], got {}",
                self.subsample_rate
            )));
        }
        if self.mc_replicates == 0 {
            return Err(CliError::usage("--mc-replicates must be at least 1"));
        }
        if self.query_points < 2 {
            return Err(CliError::usage(format!(
                "query_points must be at least 2, got {}",
                self.query_points
            )));
        }
        Ok(())
    }

    /// The command's time grid: the user's choice if given, else `fallback`.
    pub fn times_or(&self, fallback: &TGridSpec) -> Vec<f64> {
        self.t_grid.as_ref().unwrap_or(fallback).resolve()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logspace_grid_is_geometric() {
        let g = TGridSpec::parse("logspace:0:4:5").unwrap().resolve();
        assert_eq!(g.len(), 5);
        assert!((g[0] - 1.0).abs() < 1e-15);
        assert!((g[4] - 4.0_f64.exp()).abs() < 1e-12);
        let r0 = g[1] / g[0];
        let r3 = g[4] / g[3];
        assert!((r0 - r3).abs() < 1e-12, "not geometric: {r0} vs {r3}");
    }

    #[test]
    fn list_grid_sorts_and_dedups() {
        let g = TGridSpec::parse("list:10,1,1,0.5").unwrap().resolve();
        assert_eq!(g, vec![0.5, 1.0, 10.0]);
    }

    #[test]
    fn bad_grids_are_usage_errors() {
        for text in ["logspace:0:4", "logspace:4:0:5", "list:", "list:-1", "geom:1:2:3", "list:nan"] {
            let err = TGridSpec::parse(text).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{text} should be a usage error");
        }
    }

    #[test]
    fn defaults_match_the_reference_setup() {
        let cfg = ExperimentConfig::default();
        assert_eq!(cfg.n, 100);
        assert_eq!(cfg.sigma2, 0.25);
        assert_eq!(cfg.df_target, 5.0);
        assert_eq!(cfg.lambdas, vec![1.0, 0.5, 0.1]);
        assert_eq!(cfg.subsample_rate, 0.5);
        assert_eq!(cfg.query_points, 512);
    }

    #[test]
    fn layering_is_flags_over_file_over_env() {
        let dir = std::env::temp_dir().join("boostlab-config-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("layering.cfg");
        std::fs::write(&path, "seed = 5\nn = 30 # comment\nlambdas = 0.5,0.25\n").unwrap();

        let flags = GlobalOpts {
            config: Some(path.clone()),
            seed: Some(9),
            ..GlobalOpts::default()
        };
        let cfg = ExperimentConfig::assemble(&flags, Some("77")).unwrap();
        assert_eq!(cfg.seed, 9, "flag wins");
        assert_eq!(cfg.n, 30, "file sets n");
        assert_eq!(cfg.lambdas, vec![0.5, 0.25]);

        let flags = GlobalOpts {
            config: Some(path),
            ..GlobalOpts::default()
        };
        let cfg = ExperimentConfig::assemble(&flags, Some("77")).unwrap();
        assert_eq!(cfg.seed, 5, "file beats environment");

        let cfg = ExperimentConfig::assemble(&GlobalOpts::default(), Some("77")).unwrap();
        assert_eq!(cfg.seed, 77, "environment beats default");

        let cfg = ExperimentConfig::assemble(&GlobalOpts::default(), None).unwrap();
        assert_eq!(cfg.seed, DEFAULT_SEED);
    }

    #[test]
    fn unknown_config_key_is_named() {
        let dir = std::env::temp_dir().join("boostlab-config-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("unknown.cfg");
        std::fs::write(&path, "bandwidth = 3\n").unwrap();
        let flags = GlobalOpts {
            config: Some(path),
            ..GlobalOpts::default()
        };
        let err = ExperimentConfig::assemble(&flags, None).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("bandwidth"));
    }

    #[test]
    fn invalid_values_are_rejected_with_the_flag_named() {
        let cases: Vec<(GlobalOpts, &str)> = vec![
            (
                GlobalOpts { n: Some(1), ..GlobalOpts::default() },
                "--n",
            ),
            (
                GlobalOpts { sigma2: Some(-1.0), ..GlobalOpts::default() },
                "--sigma2",
            ),
            (
                GlobalOpts { subsample_rate: Some(1.5), ..GlobalOpts::default() },
                "--subsample-rate",
            ),
            (
                GlobalOpts { lambdas: Some("0.5,2".into()), ..GlobalOpts::default() },
                "--lambdas",
            ),
        ];
        for (flags, flag) in cases {
            let err = ExperimentConfig::assemble(&flags, None).unwrap_err();
            assert_eq!(err.exit_code(), 2);
            assert!(err.to_string().contains(flag), "message should name {flag}");
        }
    }
}
