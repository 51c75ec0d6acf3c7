use std::process::{Command, Output};

use couplab_core::markov::lower_bound_reference;

fn couplab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_couplab")).args(args).output().expect("binary runs")
}

fn couplab_threads(args: &[&str], threads: usize) -> Output {
    Command::new(env!("CARGO_BIN_EXE_couplab"))
        .args(args)
        .env("RAYON_NUM_THREADS", threads.to_string())
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().to_string()).collect()
}

#[test]
fn csv_is_byte_identical_across_runs_and_threads() {
    let args = ["qcc", "run", "--n", "60", "--k", "57", "--trials", "500", "--seed", "42"];
    let a = couplab_threads(&args, 1);
    let b = couplab_threads(&args, 4);
    let c = couplab_threads(&args, 4);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(b.stdout, c.stdout);
}

#[test]
fn trajectories_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traj.csv");
    let out = couplab(&[
        "qcc", "run", "--n", "12", "--k", "10", "--trials", "3", "--samples", "5", "--trajectories",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(path).unwrap();
    assert_eq!(text.lines().count(), 1 + 3 * 6);
    assert_eq!(column(&stdout(&out), "below_budget"), vec!["true"]);
}

#[test]
fn classical_branch_meets_guarantee() {
    let out = couplab(&["qcc", "run", "--n", "10", "--k", "8", "--delta", "0.1", "--trials", "20000", "--seed", "1"]);
    assert!(out.status.success());
    let csv = stdout(&out);
    assert_eq!(column(&csv, "ell"), vec!["36"]);
    assert_eq!(column(&csv, "branch"), vec!["classical"]);
    let rate: f64 = column(&csv, "success_rate")[0].parse().unwrap();
    assert!(1.0 - rate <= 0.1 + 3.0 * (0.09f64 / 20000.0).sqrt());
}

#[test]
fn classical_collection_meets_guarantee() {
    let out = couplab(&["classical", "run", "--k", "8", "--delta", "0.1", "--trials", "20000", "--seed", "3"]);
    assert!(out.status.success());
    let csv = stdout(&out);
    assert_eq!(column(&csv, "samples"), vec!["36"]);
    let rate: f64 = column(&csv, "success_rate")[0].parse().unwrap();
    let expected: f64 = column(&csv, "expected_k_bound")[0].parse().unwrap();
    assert!(expected <= 0.1);
    assert!(1.0 - rate <= 0.1 + 3.0 * (0.09f64 / 20000.0).sqrt());
}

#[test]
fn sweep_is_monotone_within_noise() {
    let out = couplab(&["qcc", "sweep", "--n", "100", "--k", "98", "--trials", "4000", "--samples", "50:450:50"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = stdout(&out);
    let rates: Vec<f64> = column(&csv, "success_rate").iter().map(|v| v.parse().unwrap()).collect();
    let ses: Vec<f64> = column(&csv, "stderr").iter().map(|v| v.parse().unwrap()).collect();
    assert_eq!(rates.len(), 9);
    for i in 1..rates.len() {
        let slack = 4.0 * (ses[i].powi(2) + ses[i - 1].powi(2)).sqrt();
        assert!(rates[i] + slack >= rates[i - 1], "drop at point {i}: {rates:?}");
    }
    let single = couplab(&["qcc", "sweep", "--n", "100", "--k", "98", "--trials", "10", "--samples", "392"]);
    assert_eq!(stdout(&single).lines().count(), 2);
}

#[test]
fn padded_verify_exit_codes() {
    let ok = couplab(&["padded", "verify"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stderr(&ok));
    assert!(stderr(&ok).contains(" 0 violations"));

    let fault = couplab(&["padded", "verify", "--inject-fault"]);
    assert_eq!(fault.status.code(), Some(1));
    assert!(stderr(&fault).contains("violation:") && stderr(&fault).contains("S={0,1}"));

    let empty = couplab(&["padded", "verify", "--grid-n", ""]);
    assert_eq!(empty.status.code(), Some(0));
    assert!(stderr(&empty).contains("warning: empty grid"));
    assert!(stderr(&empty).contains("0 checks"));
}

#[test]
fn configuration_errors_exit_two() {
    assert_eq!(couplab(&["qcc", "run", "--n", "5", "--k", "5"]).status.code(), Some(2));
    assert_eq!(couplab(&["qcc", "run", "--n", "5", "--k", "3", "--delta", "1.5"]).status.code(), Some(2));
    assert_eq!(couplab(&["qcc", "run", "--n", "5", "--k", "3", "--format", "xml"]).status.code(), Some(2));
    assert_eq!(couplab(&["qcc", "run", "--k", "3"]).status.code(), Some(2));
    assert_eq!(couplab(&["qcc", "run", "--n", "5", "--k", "3", "--trials", "0"]).status.code(), Some(2));
    assert_eq!(couplab(&["padded", "weights", "--n", "20", "--k", "10", "--t", "6", "--p", "11"]).status.code(), Some(2));
    assert_eq!(couplab(&["qcc", "bogus"]).status.code(), Some(2));
}

#[test]
fn config_file_with_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("exp.toml");
    std::fs::write(&path, "n = 40\nk = 37\ntrials = 100\nseed = 9\nformat = \"csv\"\n").unwrap();
    let cfg = path.to_str().unwrap();
    let from_file = couplab(&["qcc", "run", "--config", cfg]);
    assert!(from_file.status.success(), "{}", stderr(&from_file));
    assert_eq!(column(&stdout(&from_file), "n"), vec!["40"]);
    let overridden = couplab(&["qcc", "run", "--config", cfg, "--trials", "50"]);
    assert_eq!(column(&stdout(&overridden), "trials"), vec!["50"]);
    assert_eq!(column(&stdout(&overridden), "seed"), vec!["9"]);

    std::fs::write(&path, "n = 40\nbogus = 1\n").unwrap();
    assert_eq!(couplab(&["qcc", "run", "--config", cfg]).status.code(), Some(2));
}

#[test]
fn output_file_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rows.json");
    let out = couplab(&["classical", "guess", "--format", "json", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("\"exact\": \"17/1001\""));
}

#[test]
fn bound_columns_match_core() {
    let out = couplab(&["bounds", "eval", "--n", "1000", "--k", "995", "--delta", "0.02"]);
    assert!(out.status.success());
    let csv = stdout(&out);
    let report = lower_bound_reference(1000, 995, 0.02).unwrap();
    let printed: f64 = column(&csv, "lower_bound")[0].parse().unwrap();
    assert_eq!(printed, report.lower_value);
    assert_eq!(column(&csv, "ell")[0], report.upper_samples.to_string());
}

#[test]
fn t3_row_reports_restricted_success() {
    let out = couplab(&["classical", "t3", "--k", "6", "--l", "1", "--t", "3", "--p", "3", "--trials", "20000"]);
    assert!(out.status.success());
    let csv = stdout(&out);
    let rate: f64 = column(&csv, "success_rate")[0].parse().unwrap();
    let se: f64 = column(&csv, "stderr")[0].parse().unwrap();
    let t2: f64 = column(&csv, "exact")[0].parse().unwrap();
    assert!(t2 <= rate + 3.0 * se);
    assert_eq!(column(&csv, "n"), vec!["11"]);
}
