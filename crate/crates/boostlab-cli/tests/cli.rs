//! Black-box checks of the command-line contract: exit codes, the
//! seed-resolution order (flag over config file over environment), and the
//! files each verb leaves behind.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_boostlab"))
}

fn run(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = bin();
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("failed to spawn CLI")
}

fn read_csv(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap_or_else(|e| panic!("missing {name}: {e}"))
}

#[test]
fn usage_errors_exit_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let cases: Vec<Vec<&str>> = vec![
        vec!["fit", "--no-such-flag"],
        vec!["fit", "--t-grid", "logspace:zero:4:10"],
        vec!["fit", "--lambdas", "1.5"],
        vec!["fit", "--n", "1"],
        vec!["errors", "--subsample-rate", "0"],
        vec!["eigen", "--n", "6"],
    ];
    for mut args in cases {
        args.push("--out");
        let out_str = out.to_str().unwrap();
        args.push(out_str);
        let r = run(&args, &[]);
        assert_eq!(
            r.status.code(),
            Some(2),
            "args {args:?}: stderr {}",
            String::from_utf8_lossy(&r.stderr)
        );
        assert!(!r.stderr.is_empty(), "usage failure must explain itself");
    }
}

#[test]
fn unwritable_output_exits_with_4() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("occupied");
    std::fs::write(&blocker, "not a directory").unwrap();
    let r = run(
        &["fit", "--n", "16", "--out", blocker.to_str().unwrap()],
        &[],
    );
    assert_eq!(
        r.status.code(),
        Some(4),
        "stderr: {}",
        String::from_utf8_lossy(&r.stderr)
    );
}

#[test]
fn numeric_failures_map_to_exit_3() {
    // Clean CLI input cannot reach the numeric paths (they signal iteration
    // budgets and overflow inside the solvers), so the mapping itself is
    // pinned here.
    let err = boostlab_cli::CliError::from(boostlab::Error::Numeric("no convergence".into()));
    assert_eq!(err.exit_code(), 3);
    let usage = boostlab_cli::CliError::from(boostlab::Error::InvalidInput("bad".into()));
    assert_eq!(usage.exit_code(), 2);
}

#[test]
fn help_exits_cleanly() {
    for args in [vec!["--help"], vec!["fit", "--help"]] {
        let r = run(&args, &[]);
        assert_eq!(r.status.code(), Some(0));
        assert!(!r.stdout.is_empty());
    }
}

#[test]
fn seed_comes_from_flag_then_file_then_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = tmp.path().join("exp.conf");
    std::fs::write(&conf, "n = 16\nquery_points = 8\nseed = 7\n").unwrap();
    let base: &[&str] = &["fit", "--config", conf.to_str().unwrap(), "--t-grid", "list:1"];

    let run_to = |dir: &str, extra: &[&str], envs: &[(&str, &str)]| -> Vec<u8> {
        let out = tmp.path().join(dir);
        let mut args = base.to_vec();
        args.extend_from_slice(extra);
        args.push("--out");
        let out_str = out.to_str().unwrap().to_string();
        args.push(Box::leak(out_str.into_boxed_str()));
        let r = run(&args, envs);
        assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
        read_csv(&out, "fit.csv")
    };

    // The environment fallback loses to the file seed...
    let file_wins = run_to("a", &[], &[("BOOSTLAB_SEED", "12345")]);
    let file_alone = run_to("b", &[], &[]);
    assert_eq!(file_wins, file_alone);

    // ...and the flag beats the file.
    let flag = run_to("c", &["--seed", "12345"], &[]);
    assert_ne!(flag, file_alone);
    let env_only_matches_flag = {
        let conf2 = tmp.path().join("noseed.conf");
        std::fs::write(&conf2, "n = 16\nquery_points = 8\n").unwrap();
        let out = tmp.path().join("d");
        let r = run(
            &[
                "fit",
                "--config",
                conf2.to_str().unwrap(),
                "--t-grid",
                "list:1",
                "--out",
                out.to_str().unwrap(),
            ],
            &[("BOOSTLAB_SEED", "12345")],
        );
        assert!(r.status.success());
        read_csv(&out, "fit.csv")
    };
    assert_eq!(env_only_matches_flag, flag);
}

#[test]
fn flags_override_config_values() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = tmp.path().join("exp.conf");
    std::fs::write(&conf, "n = 16\n").unwrap();
    let out = tmp.path().join("o");
    let r = run(
        &[
            "eigen",
            "--config",
            conf.to_str().unwrap(),
            "--n",
            "12",
            "--out",
            out.to_str().unwrap(),
        ],
        &[],
    );
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let text = String::from_utf8(read_csv(&out, "eigenvalues.csv")).unwrap();
    // Header plus one row per eigenvalue of the 12-point system.
    assert_eq!(text.lines().count(), 13, "csv:\n{text}");
}

#[test]
fn every_verb_writes_its_documented_files() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = tmp.path().join("exp.conf");
    std::fs::write(
        &conf,
        "n = 20\nseed = 5\nlambdas = 0.5\nt_grid = list:0.5,2\n\
         mc_replicates = 200\nquery_points = 12\n",
    )
    .unwrap();
    let expect: [(&str, &[&str]); 5] = [
        ("fit", &["fit.csv", "fit.svg"]),
        ("errors", &["errors.csv", "errors.svg"]),
        ("eigen", &["eigenvalues.csv", "eigenvectors.csv", "eigen.svg"]),
        ("project", &["project.csv", "project.svg"]),
        ("stochastic", &["stochastic.csv"]),
    ];
    for (verb, files) in expect {
        let out = tmp.path().join(verb);
        let r = run(
            &[
                verb,
                "--config",
                conf.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
            ],
            &[],
        );
        assert!(
            r.status.success(),
            "{verb}: {}",
            String::from_utf8_lossy(&r.stderr)
        );
        for f in files {
            assert!(out.join(f).is_file(), "{verb} did not write {f}");
        }
    }
}
