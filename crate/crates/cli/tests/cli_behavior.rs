//! End-to-end behavior of the `switched` binary: wire formats, exit codes,
//! determinism, and consuming its own output.

use std::process::{Command, Output};

use switched::lift::LiftedFamily;
use switched::planar::PlanarPair;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_switched"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

#[test]
fn build_tau_pair_emits_the_canonical_pair() {
    let out = run(&["build", "tau-pair"]);
    assert!(out.status.success());
    let pair: PlanarPair = serde_json::from_str(&stdout(&out)).expect("valid pair JSON");
    let tau = pair.tau().expect("tau recorded");
    assert!((tau - 0.1299992).abs() < 5e-8);
    assert_eq!(pair.a0()[(0, 0)], -1.0);
    assert_eq!(pair.a1()[(1, 1)], -1.0);
}

#[test]
fn build_lift_contains_closed_form_corner() {
    let out = run(&["build", "lift"]);
    assert!(out.status.success());
    let lift: LiftedFamily = serde_json::from_str(&stdout(&out)).expect("valid lift JSON");
    let corner = lift.b()[0][(0, 0)];
    assert!((corner - (-1.0 - 2.0_f64.sqrt())).abs() <= 1e-12);
    assert_eq!(lift.alpha(), 2.0_f64.sqrt());
}

#[test]
fn simulate_consumes_build_output() {
    let dir = tempfile::tempdir().unwrap();
    let family = dir.path().join("pair.json");
    let law = dir.path().join("law.json");
    let csv = dir.path().join("trajectory.csv");

    let out = run(&["build", "tau-pair", "--out", family.to_str().unwrap()]);
    assert!(out.status.success());
    std::fs::write(
        &law,
        r#"{"segments":[{"duration":1.0,"weights":[1.0,0.0]},{"duration":0.5,"weights":[0.0,1.0]}],"periodic":true}"#,
    )
    .unwrap();

    let out = run(&[
        "simulate",
        "--law",
        law.to_str().unwrap(),
        "--family",
        family.to_str().unwrap(),
        "--horizon",
        "3.0",
        "--step",
        "0.25",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,x1,x2,norm");
    // 12 grid samples + 4 interior switch times + start
    let rows: Vec<&str> = lines.collect();
    assert!(rows.len() >= 13, "got {} rows", rows.len());
    let last: Vec<f64> = rows.last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!((last[0] - 3.0).abs() <= 1e-9);
    // the tau-pair is Hurwitz, a vertex bang law must decay
    assert!(last[3] < 1.0);
}

#[test]
fn simulate_accepts_lifted_families_and_rejects_mismatches() {
    let dir = tempfile::tempdir().unwrap();
    let family = dir.path().join("lift.json");
    let law2 = dir.path().join("law2.json");
    let law4 = dir.path().join("law4.json");

    assert!(run(&["build", "lift", "--out", family.to_str().unwrap()]).status.success());
    std::fs::write(&law2, r#"{"segments":[{"duration":1.0,"weights":[1.0,0.0]}],"periodic":true}"#)
        .unwrap();
    std::fs::write(
        &law4,
        r#"{"segments":[{"duration":1.0,"weights":[0.25,0.25,0.25,0.25]}],"periodic":true}"#,
    )
    .unwrap();

    let ok = run(&[
        "simulate",
        "--law",
        law4.to_str().unwrap(),
        "--family",
        family.to_str().unwrap(),
        "--horizon",
        "2.0",
    ]);
    assert!(ok.status.success());
    assert!(stdout(&ok).starts_with("t,x1,x2,x3,x4,norm"));

    // a 2-weight law cannot drive a 4-vertex family
    let bad = run(&[
        "simulate",
        "--law",
        law2.to_str().unwrap(),
        "--family",
        family.to_str().unwrap(),
    ]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn verify_emits_deterministic_reports() {
    let args = ["verify", "certificate", "--samples", "300", "--seed", "3"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b), "same config + seed must be byte-identical");

    let other = run(&["verify", "certificate", "--samples", "300", "--seed", "4"]);
    assert!(other.status.success());
    assert_ne!(stdout(&a), stdout(&other), "different seed must show in the report");
}

#[test]
fn verify_periodic_sweep_hundred_laws_all_decay() {
    let out = run(&["verify", "periodic-sweep", "--count", "100", "--seed", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["pass"], serde_json::json!(true));
    let sweep = &report["checks"][0]["details"]["sweep"];
    assert_eq!(sweep["count"], serde_json::json!(100));
    assert_eq!(sweep["allDecay"], serde_json::json!(true));
    assert_eq!(sweep["counterEvidence"].as_array().unwrap().len(), 0);
}

#[test]
fn verify_failure_names_the_check_and_exits_one() {
    let out = run(&[
        "verify",
        "counterexample",
        "--horizon",
        "36",
        "--tol-tensor",
        "1e-22",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("check failed: counterexample"), "stderr: {err}");
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["pass"], serde_json::json!(false));
}

#[test]
fn usage_and_io_failures_exit_two() {
    assert_eq!(run(&["bogus"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "all", "--unknown-key", "1"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "all", "--tol-decay", "-1"]).status.code(), Some(2));
    assert_eq!(
        run(&["simulate", "--law", "/nonexistent.json", "--family", "/nonexistent.json"])
            .status
            .code(),
        Some(2)
    );
    let unwritable = run(&["build", "tau-pair", "--out", "/nonexistent-dir/out.json"]);
    assert_eq!(unwritable.status.code(), Some(2));
}

#[test]
fn norm_history_plot_shows_a_positive_floor() {
    let dir = tempfile::tempdir().unwrap();
    let svg_path = dir.path().join("norms.svg");
    let out = run(&[
        "plot",
        "norm-history",
        "--horizon",
        "72",
        "--out",
        svg_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert!(svg.contains("class=\"guide inf\""));
    assert!(svg.contains("class=\"guide sup\""));
    let inf_value = svg
        .split("inf |y| = ")
        .nth(1)
        .and_then(|rest| rest.split('<').next())
        .and_then(|v| v.trim().parse::<f64>().ok())
        .expect("inf label parses");
    assert!(inf_value > 0.5, "inf guide {inf_value}");
    let sup_value = svg
        .split("sup |y| = ")
        .nth(1)
        .and_then(|rest| rest.split('<').next())
        .and_then(|v| v.trim().parse::<f64>().ok())
        .expect("sup label parses");
    assert!(sup_value < 1.1, "sup guide {sup_value}");
    assert!(inf_value < sup_value);
}

#[test]
fn figure_one_is_deterministic() {
    let a = run(&["plot", "figure1"]);
    let b = run(&["plot", "figure1"]);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
}
