use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hill-regularize"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const HEKTOR: &str = r#"{"schema": 1,
  "direct": {"mu": 0.0009533386, "u1": 0.9999999999405846, "u2": 0.99999999999800682, "c3": -1.0}}"#;

fn stderr_error(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text
        .lines()
        .find(|l| l.starts_with("{\"error\""))
        .expect("error object on stderr");
    serde_json::from_str(line).unwrap()
}

#[test]
fn equilibrium_reports_hektor_constants() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", HEKTOR);
    let out = run(&["equilibrium", "--config", &cfg]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["lambda1"].as_f64().unwrap() - 0.002144).abs() < 1e-6);
    assert!((v["lambda2"].as_f64().unwrap() - 2.997855).abs() < 1e-6);
    assert!(v["residuals"].is_null());
    let text = String::from_utf8(out.stdout).unwrap();
    let pos: Vec<usize> = [
        "mu",
        "u1",
        "u2",
        "lambda1",
        "lambda2",
        "delta",
        "residuals",
        "hill",
    ]
    .iter()
    .map(|k| text.find(&format!("\"{k}\"")).unwrap())
    .collect();
    assert!(pos.windows(2).all(|w| w[0] < w[1]), "field order: {text}");
}

#[test]
fn bodies_config_solves_the_sides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"schema": 1, "bodies": [
            {"mass": 1.0, "radius": 0.1, "c20": -0.1},
            {"mass": 0.001, "radius": 0.1, "c20": -0.1},
            {"mass": 1e-9, "radius": 0.001, "c20": -0.1}]}"#,
    );
    let out = run(&["equilibrium", "--config", &cfg]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["u1"], v["u2"]);
    for r in v["residuals"].as_array().unwrap() {
        assert!(r.as_f64().unwrap().abs() < 1e-14);
    }
}

#[test]
fn usage_errors_exit_with_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"schema": 1}"#);
    for args in [
        vec!["equilibrium", "--config", bad.as_str()],
        vec!["equilibrium"],
        vec!["scan", "--c-min", "0", "--c-max", "1", "--steps", "1"],
        vec!["frobnicate"],
        vec!["classify", "--format", "svg"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert_eq!(stderr_error(&out)["error"]["kind"], "usage");
    }
}

#[test]
fn domain_errors_exit_with_2() {
    let out = run(&["classify", "--nu", "0", "--alpha", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_error(&out)["error"]["kind"], "domain");

    let dir = tempfile::tempdir().unwrap();
    // C20 large enough that 1 − 3(C1 + C2) < 0.
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"schema": 1, "bodies": [
            {"mass": 3, "radius": 1, "c20": 1},
            {"mass": 2, "radius": 1, "c20": 1},
            {"mass": 1, "radius": 1, "c20": 0}]}"#,
    );
    let out = run(&["equilibrium", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn classify_prints_exact_fractions() {
    let out = run(&["classify", "--single-term", "--alpha", "4/3"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["extension"], "transmission");
    assert_eq!(
        (v["gamma_p"].as_i64(), v["gamma_q"].as_i64()),
        (Some(3), Some(5))
    );
}

#[test]
fn scan_csv_matches_the_bifurcation() {
    let out = run(&["scan", "--c-min", "-1", "--c-max", "1", "--steps", "5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let counts: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap())
        .collect();
    assert_eq!(counts, ["0", "0", "1", "4", "4"]);
}

#[test]
fn propagate_writes_trajectory_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", HEKTOR);
    let csv = dir.path().join("t.csv");
    let out = run(&[
        "propagate",
        "--config",
        &cfg,
        "--state0",
        "0.05,0.3,-0.1,0",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["verdict"], "collision-asymptotic");
    assert_eq!(summary["truncated"], false);
    assert_eq!(summary["verdict_criteria"]["heuristic"], true);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("tau,r,theta,v,w,energy_residual,t\n"));
    assert_eq!(
        text.lines().count() as u64,
        summary["samples"].as_u64().unwrap() + 1
    );
}

#[test]
fn truncated_propagation_keeps_the_partial_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    // A = B and zero angular momentum: the Cartesian orbit falls straight in.
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"schema": 1, "direct": {"mu": 0.001, "u1": 1, "u2": 1, "lambda1": -1, "lambda2": -1, "c3": 0}}"#,
    );
    let csv = dir.path().join("t.csv");
    let summary = dir.path().join("s.json");
    let out = run(&[
        "propagate",
        "--config",
        &cfg,
        "--coords",
        "cartesian",
        "--state0",
        "0.1,0,0,0",
        "--span",
        "0,5",
        "--out",
        csv.to_str().unwrap(),
        "--summary",
        summary.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_error(&out)["error"]["kind"], "truncated");
    let s: Value = serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(s["truncated"], true);
    assert!(std::fs::read_to_string(&csv).unwrap().lines().count() > 2);
}

#[test]
fn portrait_svg_is_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.svg");
    let b = dir.path().join("b.svg");
    let args = [
        "portrait",
        "--c",
        "1",
        "--grid",
        "4",
        "--samples",
        "40",
        "--out",
    ];
    let one = bin()
        .env("HILL_THREADS", "1")
        .args(args)
        .arg(&a)
        .output()
        .unwrap();
    let four = bin()
        .env("HILL_THREADS", "4")
        .args(args)
        .arg(&b)
        .output()
        .unwrap();
    assert!(one.status.success() && four.status.success());
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert_eq!(a, b);
    let svg = String::from_utf8(a).unwrap();
    assert_eq!(svg.matches(r#"class="equilibrium""#).count(), 4);
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let out = bin()
        .env("HILL_THREADS", "zero")
        .args(["classify"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_output_section_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("eq.json");
    let cfg = write(
        dir.path(),
        "c.json",
        &format!(
            r#"{{"schema": 1, "direct": {{"mu": 0.001, "u1": 1, "u2": 1, "c3": -0.5}},
                "output": {{"format": "json", "path": {:?}}}}}"#,
            target.to_str().unwrap()
        ),
    );
    let out = run(&["equilibrium", "--config", &cfg]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(target).unwrap()).unwrap();
    assert_eq!(v["hill"]["c"], 0.5);
}
