use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn ddpc(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ddpc"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("DDPC_LOG", "quiet")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn analyze_reports_structure_of_example() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("example.json");
    let out = ddpc(&["analyze", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["q"], 2);
    assert_eq!(v["r"], 2);
    assert_eq!(v["s"], 2);
    assert_eq!(v["r_controllable"], true);
    assert_eq!(v["r_observable"], true);
    assert_eq!(v["min_horizon"], 8);
}

#[test]
fn analyze_singular_pencil_is_reported_not_fatal() {
    let dir = tempfile::tempdir().unwrap();
    let sys = dir.path().join("singular.json");
    std::fs::write(
        &sys,
        r#"{"E": {"rows": 2, "cols": 2, "data": [0, 0, 0, 0]},
            "A": {"rows": 2, "cols": 2, "data": [1, 0, 0, 0]},
            "B": {"rows": 2, "cols": 1, "data": [1, 1]},
            "C": {"rows": 1, "cols": 2, "data": [1, 0]},
            "D": {"rows": 1, "cols": 1, "data": [0]}}"#,
    )
    .unwrap();
    let out = ddpc(&["analyze", "--system", sys.to_str().unwrap()], dir.path());
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["regular"], false);
    assert!(v["error"].is_string());
}

#[test]
fn collect_rejects_short_data_with_minimal_length() {
    let dir = tempfile::tempdir().unwrap();
    let out = ddpc(&["collect", "--data-length", "30"], dir.path());
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("minimal T is 51"), "stderr: {err}");
}

#[test]
fn collect_then_check_pe() {
    let dir = tempfile::tempdir().unwrap();
    let out = ddpc(&["collect", "--seed", "3"], dir.path());
    assert!(out.status.success());
    let data = dir.path().join("data.csv");
    assert!(data.exists());
    let pe = read_json(&dir.path().join("pe_report.json"));
    assert_eq!(pe["order"], 26);
    assert_eq!(pe["verdict"], true);

    let out = ddpc(&["check-pe", data.to_str().unwrap(), "--order", "26"], dir.path());
    assert!(out.status.success());
    assert_eq!(stdout_json(&out)["verdict"], true);
    // 60 samples cannot excite order 31 with one input.
    let out = ddpc(&["check-pe", data.to_str().unwrap(), "--order", "31"], dir.path());
    let v = stdout_json(&out);
    assert_eq!(v["verdict"], false);
    assert_eq!(v["length_ok"], false);
}

#[test]
fn ocp_solvers_agree_on_recorded_past() {
    let dir = tempfile::tempdir().unwrap();
    assert!(ddpc(&["collect", "--seed", "5"], dir.path()).status.success());
    let past = dir.path().join("data.csv");
    let out = ddpc(&["ocp", past.to_str().unwrap(), "--seed", "9"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["data_driven"]["feasible"], true);
    assert_eq!(v["model_based"]["feasible"], true);
    assert!(v["relative_cost_gap"].as_f64().unwrap() <= 1e-6);
    assert!(dir.path().join("ocp.json").exists());
    assert!(dir.path().join("ocp_dump.json").exists());
}

#[test]
fn mpc_writes_log_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("example.json");
    let out = ddpc(&["mpc", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(out.status.success());
    let summary = read_json(&dir.path().join("summary.json"));
    assert_eq!(summary["all_feasible"], true);
    assert_eq!(summary["steps"], 60);
    assert_eq!(summary["segments"].as_array().unwrap().len(), 2);
    let csv = std::fs::read_to_string(dir.path().join("closed_loop.csv")).unwrap();
    assert!(csv.starts_with("t,u_0,y_0,y_1,y_2,y_3,"));
    assert_eq!(csv.lines().count(), 61);
}

#[test]
fn mpc_abort_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = ddpc(&["mpc", "--horizon", "1"], dir.path());
    assert!(!out.status.success());
    let summary = read_json(&dir.path().join("summary.json"));
    assert_eq!(summary["failing_step"], 10);
    assert!(summary["failure"].is_string());
}

#[test]
fn reference_experiment_explains_data_length() {
    let dir = tempfile::tempdir().unwrap();
    let out = ddpc(&["paper-example"], dir.path());
    let v = stdout_json(&out);
    assert_eq!(v["data_length"], 60);
    assert!(v["note"].as_str().unwrap().contains("51"));
    for f in ["analysis.json", "data.csv", "closed_loop.csv", "summary.json"] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
}

#[test]
fn bad_log_level_and_unknown_config_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_ddpc"))
        .arg("analyze")
        .env("DDPC_LOG", "loud")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"horizon": 20, "horizn": 3}"#).unwrap();
    let out = ddpc(&["analyze", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(!out.status.success());
}

#[test]
fn config_defaults_match_example_file() {
    let cfg = ddpc_cli::ExperimentConfig::load(&configs().join("example.json")).unwrap();
    let defaults = ddpc_cli::ExperimentConfig::default();
    assert_eq!(cfg.setpoints, defaults.setpoints);
    assert_eq!(cfg.horizon, defaults.horizon);
    assert_eq!(cfg.data_length, defaults.data_length);
    assert!(cfg.system.unwrap().ends_with("configs/example_system.json"));
}
