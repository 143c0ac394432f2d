//! Black-box tests of the `ctrm` binary: exit codes, output format, and
//! cross-subcommand consistency.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ctrm"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn ctrm")
}

fn data_lines(stdout: &[u8]) -> Vec<String> {
    String::from_utf8(stdout.to_vec())
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

fn values(out: &Output) -> Vec<f64> {
    let lines = data_lines(&out.stdout);
    assert_eq!(lines[0], "value");
    lines[1..].iter().map(|l| l.parse().unwrap()).collect()
}

#[test]
fn config_errors_exit_2() {
    // unknown model name
    let out = run(&["simulate", "--model", "weibull", "--n-samples", "10"]);
    assert_eq!(out.status.code(), Some(2));
    // malformed config file
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let out = run(&["cdf", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    // unknown config key is rejected, not ignored
    let unknown = dir.path().join("unknown.json");
    std::fs::write(&unknown, r#"{"no_such_key": 1}"#).unwrap();
    let out = run(&["cdf", "--config", unknown.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    // invalid parameter value
    let out = run(&["simulate", "--model", "coupled", "--beta", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn io_errors_exit_3() {
    let out = run(&[
        "simulate",
        "--n-samples",
        "10",
        "--out",
        "/nonexistent-dir/o.csv",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn accuracy_errors_exit_4() {
    // Stehfest orders 6 vs 4 disagree far beyond the cross-order tolerance,
    // which must surface as an accuracy failure
    let out = run(&[
        "invert", "--model", "coupled", "--beta", "0.5", "--shape", "1", "--t", "1",
    ]);
    assert_eq!(out.status.code(), Some(0), "order 14 baseline should pass");
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("order6.json");
    std::fs::write(&cfg, r#"{"model": "coupled", "order": 6}"#).unwrap();
    let out = run(&["invert", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn octrm_dominates_ctrm_with_same_seed() {
    let base = [
        "--model", "coupled", "--beta", "0.5", "--shape", "1", "--c", "200", "--t", "1",
        "--n-samples", "2000", "--seed", "5",
    ];
    let mut v_args = vec!["simulate", "--which", "ctrm"];
    v_args.extend_from_slice(&base);
    let mut u_args = vec!["simulate", "--which", "octrm"];
    u_args.extend_from_slice(&base);
    let v = values(&run(&v_args));
    let u = values(&run(&u_args));
    assert_eq!(v.len(), 2000);
    assert!(v.iter().zip(&u).all(|(a, b)| a <= b));
    assert!(v.iter().zip(&u).any(|(a, b)| a < b));
}

#[test]
fn zero_samples_yields_header_only() {
    let out = run(&["simulate", "--n-samples", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(data_lines(&out.stdout), vec!["value".to_string()]);
}

#[test]
fn cdf_two_methods_reports_small_diff() {
    let out = run(&[
        "cdf", "--model", "coupled", "--beta", "0.5", "--shape", "1", "--t", "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let lines = data_lines(&out.stdout);
    let header: Vec<&str> = lines[0].split(',').collect();
    assert_eq!(header, ["t", "x", "closed_form", "inversion", "abs_diff"]);
    for line in &lines[1..] {
        let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert!(cells[4] < 1e-4, "closed form vs inversion diverged: {line}");
    }
}

#[test]
fn json_format_roundtrips() {
    let out = run(&["simulate", "--n-samples", "3", "--seed", "1", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(doc["version"].is_string());
    assert_eq!(doc["config"]["seed"], 1);
    assert_eq!(doc["data"].as_array().unwrap().len(), 3);
    assert!(doc["data"][0]["value"].is_number());
}

#[test]
fn invert_matches_prelimit_oracle() {
    // exponential waits with Pareto jumps: P(V(1) <= x) = e^{-(1 - F_J(x))}
    let out = run(&[
        "invert", "--model", "exponential", "--rate", "1", "--t", "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let lines = data_lines(&out.stdout);
    for line in &lines[1..] {
        let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        let (x, v) = (cells[1], cells[2]);
        if x >= 1.0 {
            let exact = (-(1.0 / x)).exp();
            assert!((v - exact).abs() < 1e-5, "at x={x}: {v} vs {exact}");
        }
    }
}

#[test]
fn converge_runs_and_reports_rows() {
    let out = run(&[
        "converge", "--model", "coupled", "--beta", "0.5", "--shape", "1", "--t", "1", "--c",
        "50", "--c", "500", "--n-samples", "4000", "--seed", "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let lines = data_lines(&out.stdout);
    assert_eq!(lines[0], "c,n_samples,ks,mc_se,pass");
    assert_eq!(lines.len(), 3);
    let ks: Vec<f64> = lines[1..]
        .iter()
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert!(ks[1] < ks[0], "KS should shrink with larger c: {ks:?}");
}

#[test]
fn workers_flag_does_not_change_output() {
    let args = |w: &'static str| {
        vec![
            "simulate", "--model", "coupled", "--beta", "0.5", "--shape", "1", "--c", "100",
            "--t", "1", "--n-samples", "9000", "--seed", "42", "--workers", w,
        ]
    };
    let one = run(&args("1"));
    let three = run(&args("3"));
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(data_lines(&one.stdout), data_lines(&three.stdout));
}

#[test]
fn out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let stdout_run = run(&["simulate", "--n-samples", "5", "--seed", "8"]);
    let file_run = run(&[
        "simulate", "--n-samples", "5", "--seed", "8", "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(file_run.status.code(), Some(0));
    assert!(file_run.stdout.is_empty());
    let written = std::fs::read_to_string(Path::new(&path)).unwrap();
    assert_eq!(
        data_lines(&stdout_run.stdout),
        data_lines(written.as_bytes())
    );
}
