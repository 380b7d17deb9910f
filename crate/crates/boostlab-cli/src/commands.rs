//! The five experiment commands. Each resolves its inputs from the shared
//! configuration, computes through the library, and writes CSV plus (for
//! the curve-producing commands) an SVG rendering.

use std::fs;
use std::path::PathBuf;

use boostlab::boosting::{boost_limit, Init};
use boostlab::errors::{
    expected_test_error_extrapolate, expected_test_error_fixed, expected_test_error_fixed_discrete,
    expected_train_error, expected_train_error_discrete, spectral_diagnostics, ErrorCurves,
};
use boostlab::learners::{calibrate_df, Dataset, LearnerSystem};
use boostlab::rng::{stream, uniform_in, Domain};
use boostlab::sim::{gen_dataset, triangle};
use boostlab::stochastic::{
    analytic_mean_path, mean_field_matrix, variance_bound, MeanFieldMode, SplineFactory,
    SubsamplePlan,
};

use crate::config::{ExperimentConfig, TGridSpec};
use crate::csv::{num, CsvFile};
use crate::svg::{value_range, Plot, PALETTE};
use crate::CliError;

struct Session {
    data: Dataset,
    learner: LearnerSystem,
    penalty: f64,
}

/// Generates the dataset and calibrates the spline learner to the target
/// degrees of freedom; the starting point of every command.
fn prepare(cfg: &ExperimentConfig) -> Result<Session, CliError> {
    let data = gen_dataset(cfg.n, cfg.sigma2, cfg.seed)?;
    let (penalty, learner) = calibrate_df(&data, cfg.df_target)?;
    Ok(Session { data, learner, penalty })
}

fn out_path(cfg: &ExperimentConfig, name: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(&cfg.out_dir).map_err(|e| CliError::io(&cfg.out_dir, e))?;
    Ok(cfg.out_dir.join(name))
}

fn announce(path: &std::path::Path) {
    println!("wrote {}", path.display());
}

/// Evenly spaced query points spanning the covariate domain [-1, 1].
fn query_grid(count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| -1.0 + 2.0 * i as f64 / (count - 1) as f64)
        .collect()
}

/// Compact stopping-time label for legends.
fn short_t(t: f64) -> String {
    if t == t.trunc() && t.abs() < 1e6 {
        format!("{t:.0}")
    } else if t >= 0.01 && t < 1000.0 {
        format!("{t:.2}")
    } else {
        format!("{t:.2e}")
    }
}

/// Fitted curves at chosen stopping times over a dense query grid.
pub fn cmd_fit(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let session = prepare(cfg)?;
    let times = cfg.times_or(&TGridSpec::List(vec![0.0, 1.0, 10.0, 100.0, 1000.0]));
    let queries = query_grid(cfg.query_points);
    let evaluations = boost_limit(&session.learner, session.data.y(), &times, Init::Mean)?;

    let mut csv = CsvFile::create(out_path(cfg, "fit.csv")?, "x,t,Fhat,f_true")?;
    let mut curves: Vec<(f64, Vec<f64>)> = Vec::new();
    for eval in &evaluations {
        let preds = eval.predict(&session.learner, &queries)?;
        for (x, p) in queries.iter().zip(&preds) {
            csv.row(&[num(*x), num(eval.t()), num(*p), num(triangle(*x))])?;
        }
        curves.push((eval.t(), preds));
    }
    announce(&csv.finish()?);

    let truth: Vec<(f64, f64)> = queries.iter().map(|&x| (x, triangle(x))).collect();
    let points: Vec<(f64, f64)> = session
        .data
        .x()
        .iter()
        .zip(session.data.y())
        .map(|(&x, &y)| (x, y))
        .collect();
    let y_range = value_range(
        points
            .iter()
            .map(|p| p.1)
            .chain(curves.iter().flat_map(|(_, v)| v.iter().copied())),
    );
    let mut plot = Plot::new(
        "Boosted fits at increasing stopping times",
        "x",
        "fitted value",
        (-1.0, 1.0),
        y_range,
    );
    plot.dots(&points, PALETTE[7], 2.0);
    plot.line(&truth, "#000000", Some("truth"));
    for (i, (t, preds)) in curves.iter().enumerate() {
        let pts: Vec<(f64, f64)> = queries.iter().copied().zip(preds.iter().copied()).collect();
        plot.line(&pts, PALETTE[i % PALETTE.len()], Some(&format!("t={}", short_t(*t))));
    }
    announce(&plot.write(out_path(cfg, "fit.svg")?)?);
    Ok(())
}

/// Expected error curves: per-rate dynamics, the rate-zero limit, and the
/// fresh-covariate extension.
pub fn cmd_errors(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let session = prepare(cfg)?;
    let times = cfg.times_or(&TGridSpec::Logspace { a: 0.0, b: 4.0, k: 200 });
    let f_values: Vec<f64> = session.data.x().iter().map(|&x| triangle(x)).collect();
    let sigma = cfg.sigma2.sqrt();

    let mut csv = CsvFile::create(
        out_path(cfg, "errors.csv")?,
        "curve,regime,lambda,t,bias2,variance,total,floor",
    )?;
    let write_curve =
        |csv: &mut CsvFile, label: &str, regime: &str, lambda: f64, c: &ErrorCurves| -> Result<(), CliError> {
            for (i, &t) in c.t_grid().iter().enumerate() {
                csv.row(&[
                    label.to_string(),
                    regime.to_string(),
                    num(lambda),
                    num(t),
                    num(c.bias2()[i]),
                    num(c.var()[i]),
                    num(c.total()[i]),
                    num(c.noise_floor()),
                ])?;
            }
            Ok(())
        };

    let mut svg_curves: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    let as_points =
        |c: &ErrorCurves| -> Vec<(f64, f64)> { c.t_grid().iter().copied().zip(c.total().iter().copied()).collect() };

    for &lambda in &cfg.lambdas {
        let train =
            expected_train_error_discrete(&session.learner, &f_values, sigma, lambda, &times, Init::Mean)?;
        write_curve(&mut csv, "train", "discrete", lambda, &train)?;
        let test =
            expected_test_error_fixed_discrete(&session.learner, &f_values, sigma, lambda, &times, Init::Mean)?;
        write_curve(&mut csv, "test_fixed", "discrete", lambda, &test)?;
        svg_curves.push((format!("test λ={lambda}"), as_points(&test)));
    }

    let train = expected_train_error(&session.learner, &f_values, sigma, &times, Init::Mean)?;
    write_curve(&mut csv, "train", "limit", 0.0, &train)?;
    let test = expected_test_error_fixed(&session.learner, &f_values, sigma, &times, Init::Mean)?;
    write_curve(&mut csv, "test_fixed", "limit", 0.0, &test)?;

    let mut rng = stream(cfg.seed, Domain::QuerySampling, 0, 0);
    let mut sampler = || uniform_in(&mut rng, -1.0, 1.0);
    let extrapolate = expected_test_error_extrapolate(
        &session.learner,
        &triangle,
        sigma,
        &times,
        &mut sampler,
        cfg.mc_replicates,
    )?;
    write_curve(&mut csv, "test_extrapolate", "limit", 0.0, &extrapolate)?;
    announce(&csv.finish()?);

    svg_curves.push(("train limit".to_string(), as_points(&train)));
    svg_curves.push(("test limit".to_string(), as_points(&test)));
    svg_curves.push(("test extrapolate".to_string(), as_points(&extrapolate)));

    let y_range = value_range(svg_curves.iter().flat_map(|(_, pts)| pts.iter().map(|p| p.1)));
    let t_lo = times.first().copied().unwrap_or(1.0);
    let t_hi = times.last().copied().unwrap_or(1.0);
    let mut plot = Plot::new(
        "Expected error against stopping time",
        "t",
        "expected error",
        (t_lo, t_hi),
        y_range,
    );
    if t_lo > 0.0 {
        plot = plot.with_log_x();
    }
    for (i, (label, pts)) in svg_curves.iter().enumerate() {
        plot.line(pts, PALETTE[i % PALETTE.len()], Some(label));
    }
    announce(&plot.write(out_path(cfg, "errors.svg")?)?);
    Ok(())
}

/// Learner spectrum (top 60) and the leading/trailing four eigenvectors.
pub fn cmd_eigen(cfg: &ExperimentConfig) -> Result<(), CliError> {
    if cfg.n < 8 {
        return Err(CliError::usage(format!(
            "--n must be at least 8 to export four leading and four trailing eigenvectors, got {}",
            cfg.n
        )));
    }
    let session = prepare(cfg)?;
    let diag = spectral_diagnostics(&session.learner, &[1.0])?;

    let top = 60.min(cfg.n);
    let mut csv = CsvFile::create(out_path(cfg, "eigenvalues.csv")?, "index,mu")?;
    for (i, &mu) in diag.eigenvalues().iter().take(top).enumerate() {
        csv.row(&[(i + 1).to_string(), num(mu)])?;
    }
    announce(&csv.finish()?);

    let leading = diag.leading_vectors(4);
    let trailing = diag.trailing_vectors(4); // ordered 4th-from-last .. last
    let mut csv = CsvFile::create(
        out_path(cfg, "eigenvectors.csv")?,
        "x,lead_1,lead_2,lead_3,lead_4,trail_4,trail_3,trail_2,trail_1",
    )?;
    for (i, &x) in session.learner.design().iter().enumerate() {
        let mut row = vec![num(x)];
        row.extend(leading.iter().map(|u| num(u[i])));
        row.extend(trailing.iter().map(|u| num(u[i])));
        csv.row(&row)?;
    }
    announce(&csv.finish()?);

    let spectrum: Vec<(f64, f64)> = diag
        .eigenvalues()
        .iter()
        .take(top)
        .enumerate()
        .filter(|(_, &mu)| mu > 0.0)
        .map(|(i, &mu)| ((i + 1) as f64, mu.log10()))
        .collect();
    let mut plot = Plot::new(
        "Spectrum of the calibrated learner",
        "index",
        "log10(eigenvalue)",
        (1.0, top as f64),
        value_range(spectrum.iter().map(|p| p.1)),
    );
    plot.line(&spectrum, PALETTE[0], Some("eigenvalues"));
    plot.dots(&spectrum, PALETTE[0], 2.4);
    announce(&plot.write(out_path(cfg, "eigen.svg")?)?);
    Ok(())
}

/// Smoothed-projection coefficients and degrees of freedom per requested
/// stopping time.
pub fn cmd_project(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let session = prepare(cfg)?;
    let times = cfg.times_or(&TGridSpec::List(vec![1.0, 10.0, 100.0, 1000.0]));
    let diag = spectral_diagnostics(&session.learner, &times)?;

    let mut csv = CsvFile::create(out_path(cfg, "project.csv")?, "t,df,index,coeff")?;
    for (row, &t) in times.iter().enumerate() {
        let coeffs = diag.coefficients(row);
        for (j, &c) in coeffs.iter().enumerate() {
            csv.row(&[num(t), num(diag.df()[row]), (j + 1).to_string(), num(c)])?;
        }
    }
    announce(&csv.finish()?);

    let mut plot = Plot::new(
        "Per-direction shrinkage of the limit operator",
        "eigenvalue index",
        "coefficient",
        (1.0, cfg.n as f64),
        (0.0, 1.05),
    );
    for (row, &t) in times.iter().enumerate() {
        let pts: Vec<(f64, f64)> = diag
            .coefficients(row)
            .iter()
            .enumerate()
            .map(|(j, &c)| ((j + 1) as f64, c))
            .collect();
        plot.line(
            &pts,
            PALETTE[row % PALETTE.len()],
            Some(&format!("t={} (df={:.2})", short_t(t), diag.df()[row])),
        );
    }
    announce(&plot.write(out_path(cfg, "project.svg")?)?);
    Ok(())
}

/// Exact subset count `C(n, k)` stays under the enumeration budget?
fn enumeration_feasible(n: usize, size: usize) -> bool {
    let k = size.min(n - size);
    let mut c = 1.0_f64;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
        if c > 1e6 {
            return false;
        }
    }
    true
}

/// Subsampled boosting: empirical replicate summaries against the
/// subset-averaged prediction, plus the closed-form variance bound.
pub fn cmd_stochastic(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let session = prepare(cfg)?;
    let x = session.data.x().to_vec();
    let y = session.data.y().to_vec();
    let plan = SubsamplePlan::new(cfg.n, cfg.subsample_rate, cfg.seed)?;
    let factory = SplineFactory { penalty: session.penalty };
    let mode = if enumeration_feasible(cfg.n, plan.size()) {
        MeanFieldMode::ExactEnumeration
    } else {
        MeanFieldMode::MonteCarlo(cfg.mc_replicates)
    };
    let times = cfg.times_or(&TGridSpec::List(vec![1.0]));
    let horizon = times[0];

    let s_bar = mean_field_matrix(&factory, &x, &plan, mode)?;

    let mut csv = CsvFile::create(
        out_path(cfg, "stochastic.csv")?,
        "lambda,m,index,x,mean_emp,mean_analytic,var_emp,var_bound",
    )?;
    for &lambda in &cfg.lambdas {
        if lambda >= 1.0 {
            eprintln!(
                "note: skipping lambda = {lambda}; the subsampled recursion needs a rate \
                 strictly inside (0, 1)"
            );
            continue;
        }
        let m = ((horizon / lambda).round() as usize).max(1);
        let audit = variance_bound(&factory, &plan, &x, &y, lambda, m, &[], cfg.mc_replicates, mode)?;
        let analytic = analytic_mean_path(&s_bar, &s_bar, &y, lambda, m)?;
        let max_var = audit
            .empirical()
            .iter()
            .fold(0.0_f64, |acc, &v| acc.max(v));
        println!(
            "lambda {lambda}: m={m}, K={:.4e}, bound={:.4e}, max empirical variance={:.4e}, within={}",
            audit.constants().k,
            audit.bound(),
            max_var,
            audit.all_within()
        );
        for i in 0..cfg.n {
            csv.row(&[
                num(lambda),
                m.to_string(),
                (i + 1).to_string(),
                num(x[i]),
                num(audit.means()[i]),
                num(analytic[m][i]),
                num(audit.empirical()[i]),
                num(audit.bound()),
            ])?;
        }
    }
    announce(&csv.finish()?);
    Ok(())
}
