use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use resilient_consensus::plant::{AttackProfile, ScalarSignal};
use resilient_consensus::scenario::four_agent_benchmark;
use tempfile::TempDir;

fn rescon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rescon")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

/// Benchmark with no attacks and control coefficients of −1; converges at the default step.
fn write_tame_scenario(dir: &Path, horizon: f64) -> String {
    let mut sc = four_agent_benchmark::<f64>();
    sc.name = "tame".into();
    sc.attacks = AttackProfile::identity(4);
    sc.integration.horizon = horizon;
    for a in sc.agents.iter_mut() {
        a.initial.x1 = a.initial.s;
        a.initial.x2 = 0.0;
        a.model.theta1 = vec![0.0];
        a.model.theta2 = vec![0.0];
        a.model.g1 = ScalarSignal::constant(-1.0);
        a.model.g2 = ScalarSignal::constant(-1.0);
        a.model.o1 = ScalarSignal::constant(0.0);
        a.model.o2 = ScalarSignal::constant(0.0);
    }
    let path = dir.join("tame.json");
    fs::write(&path, sc.to_json()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn emitted_builtin_validates() {
    let dir = TempDir::new().unwrap();
    let out = rescon(&["emit-builtin"]);
    assert_eq!(code(&out), 0);
    let path = dir.path().join("b.json");
    fs::write(&path, &out.stdout).unwrap();
    let out = rescon(&["validate", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn invalid_scenario_exits_with_2() {
    let dir = TempDir::new().unwrap();
    let mut doc: serde_json::Value = serde_json::from_slice(&rescon(&["emit-builtin"]).stdout).unwrap();
    doc["reference"]["k"] = (-1.0).into();
    let path = dir.path().join("bad.json");
    fs::write(&path, doc.to_string()).unwrap();
    let out = rescon(&["validate", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("reference"));
    let out = rescon(&["run", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}

#[test]
fn completed_run_writes_trace_and_summary() {
    let dir = TempDir::new().unwrap();
    let scenario = write_tame_scenario(dir.path(), 2.0);
    let out_dir = dir.path().join("run");
    let out = rescon(&["run", &scenario, "--out", out_dir.to_str().unwrap(), "--verbose-trace"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["status"]["status"], "completed");
    let mut reader = csv::Reader::from_path(out_dir.join("trace.csv")).unwrap();
    let headers = reader.headers().unwrap().clone();
    for column in ["t", "y_1", "F2_4", "z2_1", "E"] {
        assert!(headers.iter().any(|h| h == column), "missing {column} in {headers:?}");
    }
    assert!(reader.records().count() > 10);

    let plots = dir.path().join("plots");
    let out = rescon(&[
        "plot",
        out_dir.join("trace.csv").to_str().unwrap(),
        "--select",
        "errors",
        "--omega",
        "0.25",
        "--out",
        plots.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let svg = fs::read_to_string(plots.join("errors_0.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}

#[test]
fn unstable_run_exits_with_3_and_keeps_the_partial_trace() {
    let dir = TempDir::new().unwrap();
    let out = rescon(&["run", "four-agent-benchmark", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    assert!(dir.path().join("trace.csv").exists());
    let summary = fs::read_to_string(dir.path().join("summary.json")).unwrap();
    assert!(summary.contains("unstable"));
}

#[test]
fn certification_exit_codes() {
    assert_eq!(code(&rescon(&["nussbaum-verify", "--preset", "slow-growth"])), 0);
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("weak.json");
    fs::write(&path, r#"{"a": 0.05, "b": 0.0, "c": 0.51, "omega": 1.0, "variant": "cosine"}"#).unwrap();
    let csv_path = dir.path().join("ratios.csv");
    let out =
        rescon(&["nussbaum-verify", path.to_str().unwrap(), "--max-index", "6", "--csv", csv_path.to_str().unwrap()]);
    assert_eq!(code(&out), 4);
    assert_eq!(fs::read_to_string(csv_path).unwrap().lines().count(), 7);
    fs::write(&path, r#"{"a": 1.0, "b": 0.0, "c": 2.0, "omega": 1.0, "variant": "cosine"}"#).unwrap();
    assert_eq!(code(&rescon(&["nussbaum-verify", path.to_str().unwrap()])), 2);
}

#[test]
fn sweep_writes_one_row_per_value() {
    let dir = TempDir::new().unwrap();
    let scenario: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(write_tame_scenario(dir.path(), 1.0)).unwrap()).unwrap();
    let plan = serde_json::json!({
        "base": {"inline": scenario},
        "parameter": "epsilon",
        "values": [0.05, 0.1, 0.2],
    });
    let path = dir.path().join("sweep.json");
    fs::write(&path, plan.to_string()).unwrap();
    let out_dir = dir.path().join("sweep");
    let out = rescon(&["sweep", path.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    assert_eq!(table.lines().count(), 4);
    assert!(out_dir.join("sweep.svg").exists());
    assert!(out_dir.join("summary_2.json").exists());
}
