use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn swapsim(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_swapsim"));
    cmd.args(args).env_remove("SWAPSIM_SEED");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn simulate_writes_three_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("run");
    let out = swapsim(&["simulate", "--trials", "4000", "--seed", "3", "--out", prefix.to_str().unwrap()], &[]);
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("run.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("trial_id,a,b,A,B,c_outcome,heralded"));
    assert_eq!(csv.lines().count(), 4001);
    let mirror: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("run.json")).unwrap()).unwrap();
    assert_eq!(mirror["meta"]["seed"], 3);
    assert_eq!(mirror["records"].as_array().unwrap().len(), 4000);
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("run.report.json")).unwrap()).unwrap();
    assert_eq!(report["meta"]["trials"], 4000);
    assert_eq!(report["nda"]["verdict"], "NoDifference");
    assert!(report["chsh"]["S"].is_f64());
    assert!(!report["ci_tests"].as_array().unwrap().is_empty());
}

#[test]
fn exact_report_on_stdout() {
    let report = stdout_json(&swapsim(&["simulate", "--exact", "--geometry", "spacelike"], &[]));
    let s = report["chsh"]["S"].as_f64().unwrap();
    assert!((s - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-9);
    assert_eq!(report["meta"]["geometry"], "spacelike");
    assert_eq!(report["fragility"]["cells"].as_array().unwrap().len(), 16);
    assert!((report["herald_probability"].as_f64().unwrap() - 0.25).abs() < 1e-12);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["simulate", "--trials", "10"][..],
        &["simulate", "--exact", "--geometry", "nowhere"],
        &["simulate", "--exact", "--angles-a", "0"],
        &["toy", "--variant", "banana"],
        &["geometry", "--boost", "1.5"],
        &["frobnicate"],
    ] {
        let out = swapsim(args, &[]);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn io_errors_exit_3() {
    let out = swapsim(&["rps", "--trials", "100", "--out", "/nonexistent-dir/x"], &[]);
    assert_eq!(out.status.code(), Some(3));
    let out = swapsim(&["rps", "--config", "/nonexistent-dir/cfg"], &[]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# teleport settings\ncontrolled = false\ntrials = 2000\nseed = 8\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let from_file = stdout_json(&swapsim(&["teleport", "--config", cfg], &[]));
    assert_eq!(from_file["meta"]["controlled"], false);
    assert_eq!(from_file["meta"]["trials"], 2000);
    let overridden = stdout_json(&swapsim(&["teleport", "--config", cfg, "--controlled", "true"], &[]));
    assert_eq!(overridden["meta"]["controlled"], true);
    assert_eq!(overridden["meta"]["seed"], 8);
}

#[test]
fn seed_from_environment() {
    let env = stdout_json(&swapsim(&["rps", "--trials", "500"], &[("SWAPSIM_SEED", "17")]));
    let flag = stdout_json(&swapsim(&["rps", "--trials", "500", "--seed", "17"], &[]));
    assert_eq!(env["meta"]["seed"], 17);
    assert_eq!(env, flag);
    let overridden = stdout_json(&swapsim(&["rps", "--trials", "500", "--seed", "1"], &[("SWAPSIM_SEED", "17")]));
    assert_eq!(overridden["meta"]["seed"], 1);
}

#[test]
fn echoed_meta_reproduces_the_run() {
    let first = stdout_json(&swapsim(&["toy", "--variant", "source", "--trials", "3000", "--seed", "4"], &[]));
    let meta = first["meta"].as_object().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("echo.cfg");
    let text: String = meta
        .iter()
        .filter(|(k, _)| *k != "command")
        .map(|(k, v)| format!("{k} = {}\n", v.as_str().map(str::to_string).unwrap_or_else(|| v.to_string())))
        .collect();
    fs::write(&cfg, text).unwrap();
    let second = stdout_json(&swapsim(&["toy", "--config", cfg.to_str().unwrap()], &[]));
    assert_eq!(first, second);
}

#[test]
fn geometry_lists_frames() {
    let out = swapsim(&["geometry", "--preset", "delayed", "--boost", "0.5", "--boost", "-0.5"], &[]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("classification: DD"));
    assert_eq!(text.lines().filter(|l| l.trim_start().starts_with("v=")).count(), 3);

    let custom = swapsim(&["geometry", "--event", "C=-5,0"], &[]);
    let text = String::from_utf8(custom.stdout).unwrap();
    assert!(text.contains("preset: custom"), "{text}");
}

#[test]
fn toy_writes_csv_when_asked() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("toy");
    let out = swapsim(&["toy", "--trials", "500", "--out", prefix.to_str().unwrap()], &[]);
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("toy.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("trial_id,a,b,A,B,lambda_A,lambda_B,accepted"));
    assert!(dir.path().join("toy.report.json").exists());
}
