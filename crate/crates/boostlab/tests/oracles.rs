//! Independent-route cross-checks. Every test here recomputes a library
//! quantity with a deliberately different algorithm (cyclic Jacobi instead
//! of tridiagonal QL, dense Gauss-Jordan instead of the banded Reinsch
//! solve, plain Monte Carlo instead of closed forms) so a shared bug in the
//! production path cannot hide.

use boostlab::learners::{calibrate_df, smoothing_spline_design};
use boostlab::linalg::limit_weights;
use boostlab::rng::{standard_normal, stream, uniform_in, Domain};
use boostlab::sim::{gen_dataset, triangle};
use boostlab::{boosting, errors, Init, Matrix};

const SEED: u64 = 0x0a_c1e5;

/// Cyclic Jacobi eigenvalues of a symmetric matrix, descending.
///
/// Rotations kill one off-diagonal pair at a time; sweeps repeat until the
/// off-diagonal Frobenius mass is negligible against the matrix scale.
fn jacobi_eigenvalues(m: &Matrix) -> Vec<f64> {
    let n = m.n();
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| m.row(i).to_vec()).collect();
    let scale: f64 = (0..n)
        .map(|i| (0..n).map(|j| a[i][j] * a[i][j]).sum::<f64>())
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);

    for _sweep in 0..60 {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += a[i][j] * a[i][j];
            }
        }
        if off.sqrt() <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let app = a[p][p];
                let aqq = a[q][q];
                a[p][p] = app - t * apq;
                a[q][q] = aqq + t * apq;
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[p][k] = a[k][p];
                    a[k][q] = s * akp + c * akq;
                    a[q][k] = a[k][q];
                }
            }
        }
    }

    let mut vals: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    vals.sort_by(|x, y| y.total_cmp(x));
    vals
}

/// Gauss-Jordan inverse with partial pivoting; the matrices inverted here
/// are well inside f64 range, so a failed pivot is a test bug.
fn dense_inverse(m: &Matrix) -> Matrix {
    let n = m.n();
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = m.row(i).to_vec();
            row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        assert!(a[pivot][col].abs() > 1e-200, "singular matrix in oracle");
        a.swap(col, pivot);
        let inv = 1.0 / a[col][col];
        for v in a[col].iter_mut() {
            *v *= inv;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = a[row][col];
            if f == 0.0 {
                continue;
            }
            for j in 0..2 * n {
                a[row][j] -= f * a[col][j];
            }
        }
    }
    Matrix::from_fn(n, n, |i, j| a[i][n + j]).unwrap()
}

/// Second-difference matrix Q (n x (n-2)) and curvature Gram matrix R
/// ((n-2) x (n-2)) of a natural cubic spline on the given knots.
fn penalty_factors(x: &[f64]) -> (Matrix, Matrix) {
    let n = x.len();
    let k = n - 2;
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let q = Matrix::from_fn(n, k, |i, c| {
        if i == c {
            1.0 / h[c]
        } else if i == c + 1 {
            -1.0 / h[c] - 1.0 / h[c + 1]
        } else if i == c + 2 {
            1.0 / h[c + 1]
        } else {
            0.0
        }
    })
    .unwrap();
    let r = Matrix::from_fn(k, k, |i, j| {
        if i == j {
            (h[i] + h[i + 1]) / 3.0
        } else if j == i + 1 || i == j + 1 {
            h[i.max(j)] / 6.0
        } else {
            0.0
        }
    })
    .unwrap();
    (q, r)
}

/// Dense smoother oracle: (I + nu * Q R^{-1} Q^T)^{-1} by Gauss-Jordan.
fn dense_spline_smoother(x: &[f64], nu: f64) -> Matrix {
    let n = x.len();
    let (q, r) = penalty_factors(x);
    let k = q.matmul(&dense_inverse(&r)).matmul(&q.transpose());
    let m = Matrix::from_fn(n, n, |i, j| {
        (if i == j { 1.0 } else { 0.0 }) + nu * k.get(i, j)
    })
    .unwrap();
    dense_inverse(&m)
}

/// Strictly increasing random design with a guaranteed minimum gap.
fn random_design(n: usize, tag: u64) -> Vec<f64> {
    let mut rng = stream(SEED, Domain::DesignPoints, tag, 0);
    let mut x: Vec<f64> = (0..n).map(|_| uniform_in(&mut rng, -1.0, 1.0)).collect();
    x.sort_by(f64::total_cmp);
    // Spread clustered points so interval lengths stay well conditioned.
    for i in 1..n {
        if x[i] - x[i - 1] < 1e-3 {
            x[i] = x[i - 1] + 1e-3;
        }
    }
    x
}

#[test]
fn jacobi_oracle_matches_the_builtin_eigensolver() {
    let x = random_design(60, 1);
    let learner = smoothing_spline_design(&x, 0.002).unwrap();
    let built_in = learner.eigensystem().unwrap();
    let oracle = jacobi_eigenvalues(learner.influence());

    assert_eq!(oracle.len(), built_in.values().len());
    for (o, b) in oracle.iter().zip(built_in.values()) {
        assert!(
            (o - b).abs() < 1e-10,
            "eigenvalue mismatch: jacobi {o:.15e} vs builtin {b:.15e}"
        );
    }
}

#[test]
fn dense_inverse_oracle_rebuilds_the_spline_influence() {
    let x = random_design(40, 2);
    for &nu in &[1e-4, 5e-3, 0.2] {
        let learner = smoothing_spline_design(&x, nu).unwrap();
        let oracle = dense_spline_smoother(&x, nu);
        let mut worst = 0.0_f64;
        for i in 0..40 {
            for j in 0..40 {
                worst = worst.max((learner.influence().get(i, j) - oracle.get(i, j)).abs());
            }
        }
        assert!(
            worst < 1e-8,
            "banded and dense smoothers disagree by {worst:.3e} at nu={nu}"
        );
    }
}

#[test]
fn independent_trace_routes_confirm_df_calibration() {
    let data = gen_dataset(40, 0.25, 7).unwrap();
    let (nu, learner) = calibrate_df(&data, 5.0).unwrap();

    // Route 1: trace of the dense Gauss-Jordan smoother.
    let dense = dense_spline_smoother(data.x(), nu);
    assert!((dense.trace() - 5.0).abs() < 1e-6, "dense trace {}", dense.trace());

    // Route 2: eigenvalues of the penalty matrix via Jacobi; each spectral
    // direction contributes 1/(1 + nu * rho).
    let (q, r) = penalty_factors(data.x());
    let k = q.matmul(&dense_inverse(&r)).matmul(&q.transpose());
    let sym = Matrix::from_fn(40, 40, |i, j| 0.5 * (k.get(i, j) + k.get(j, i)))
        .unwrap()
        .tag_symmetric()
        .unwrap();
    let rho = jacobi_eigenvalues(&sym);
    let spectral: f64 = rho.iter().map(|&r| 1.0 / (1.0 + nu * r.max(0.0))).sum();
    assert!(
        (spectral - 5.0).abs() < 1e-6,
        "spectral trace {spectral} (nu={nu})"
    );

    // The library's own accounting agrees.
    assert!((learner.df() - 5.0).abs() < 1e-6);
}

#[test]
fn truncated_series_oracle_matches_limit_weights() {
    // w_t = sum_{j>=1} t^j (-S)^{j-1} y / j! evaluated by brute force. At
    // t <= 1 and spectrum inside [0, 1] the tail beyond 40 terms is far
    // below f64 resolution, so the truncation is exact for this purpose.
    let x = random_design(12, 3);
    let learner = smoothing_spline_design(&x, 0.01).unwrap();
    let s = learner.influence();
    let mut rng = stream(SEED, Domain::Noise, 3, 0);
    let y: Vec<f64> = (0..12).map(|_| standard_normal(&mut rng)).collect();
    let ybar = y.iter().sum::<f64>() / 12.0;
    let tilde: Vec<f64> = y.iter().map(|v| v - ybar).collect();

    for &t in &[0.05, 0.3, 1.0] {
        let mut acc = vec![0.0; 12];
        let mut power = tilde.clone(); // (-S)^{j-1} y
        let mut coeff = t; // t^j / j!
        for j in 1..=40 {
            for i in 0..12 {
                acc[i] += coeff * power[i];
            }
            let sp = s.matvec(&power);
            for i in 0..12 {
                power[i] = -sp[i];
            }
            coeff *= t / (j as f64 + 1.0);
        }

        let w = limit_weights(s, &tilde, t).unwrap();
        for i in 0..12 {
            assert!(
                (w.values()[i] - acc[i]).abs() < 1e-10,
                "weight {i} at t={t}: {} vs series {}",
                w.values()[i],
                acc[i]
            );
        }
    }
}

#[test]
fn simulated_extrapolation_error_matches_the_formula() {
    let n = 40;
    let sigma = 0.5;
    let data = gen_dataset(n, sigma * sigma, 11).unwrap();
    let (_, learner) = calibrate_df(&data, 5.0).unwrap();
    let f_values: Vec<f64> = data.x().iter().map(|&v| triangle(v)).collect();
    let t_grid = [0.5, 2.0, 10.0];

    // Closed-form route: exact in everything but the covariate average,
    // which uses enough draws to be negligible next to the simulation SE.
    let mut sampler_rng = stream(SEED, Domain::QuerySampling, 0, 0);
    let mut sampler = || uniform_in(&mut sampler_rng, -1.0, 1.0);
    let curves = errors::expected_test_error_extrapolate(
        &learner,
        &triangle,
        sigma,
        &t_grid,
        &mut sampler,
        400_000,
    )
    .unwrap();

    // Simulation route: fresh fitting noise, fresh query point, fresh
    // response noise per replicate; nothing shared with the formula.
    let replicates = 30_000_u64;
    let mut sum = [0.0_f64; 3];
    let mut sumsq = [0.0_f64; 3];
    for r in 0..replicates {
        let mut noise = stream(SEED, Domain::ResponseReplicates, r, 0);
        let y: Vec<f64> = f_values
            .iter()
            .map(|f| f + sigma * standard_normal(&mut noise))
            .collect();
        let mut fresh = stream(SEED, Domain::ResponseReplicates, r, 1);
        let xq = uniform_in(&mut fresh, -1.0, 1.0);
        let yq = triangle(xq) + sigma * standard_normal(&mut fresh);

        let fits = boosting::boost_limit(&learner, &y, &t_grid, Init::Mean).unwrap();
        for (k, fit) in fits.iter().enumerate() {
            let pred = fit.predict(&learner, &[xq]).unwrap()[0];
            let e = (yq - pred) * (yq - pred);
            sum[k] += e;
            sumsq[k] += e * e;
        }
    }

    let rf = replicates as f64;
    for k in 0..3 {
        let mean = sum[k] / rf;
        let var = (sumsq[k] - sum[k] * sum[k] / rf) / (rf - 1.0);
        let se = (var / rf).sqrt();
        let gap = (curves.total()[k] - mean).abs();
        // 3 SE for the simulation plus headroom for the formula's own
        // covariate sampling noise.
        assert!(
            gap < 4.0 * se,
            "t={}: formula {} vs simulation {} (se {se:.3e})",
            t_grid[k],
            curves.total()[k],
            mean
        );
    }
}
