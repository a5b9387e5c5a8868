//! Command-line behaviour: exit codes, output formats, config handling.

use std::fs;
use std::path::Path;
use std::process::Command;

use bvloc::cli;
use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["bvloc"];
    full.extend_from_slice(args);
    let code = cli::run(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn dir_arg(d: &Path) -> String {
    d.to_str().unwrap().to_string()
}

#[test]
fn list_formats() {
    let (code, table, _) = run(&["list"]);
    assert_eq!(code, 0);
    for id in ["sphere_dh", "sphere_cohft", "s2xs2_bott", "free_control", "degenerate_pi"] {
        assert!(table.contains(id), "{table}");
    }
    let (code, json, _) = run(&["list", "--format", "json"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["entries"].as_array().unwrap().len(), 5);

    let (code, csv, _) = run(&["list", "--format", "csv", "--evaluator", "sweep"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("id,"));
    assert_eq!(lines.len(), 4, "{csv}");
}

#[test]
fn localize_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, err) = run(&["localize", "--entry", "sphere_dh", "--format", "json", "--out-dir", &dir_arg(dir.path())]);
    assert_eq!(code, 0, "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["schema"], 1);
    let exact = 2.0 * std::f64::consts::PI * (std::f64::consts::E - 1.0 / std::f64::consts::E);
    assert!((v["localized_value"].as_f64().unwrap() - exact).abs() < 1e-9);
    let written: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert!(!written.is_empty());
    for f in written {
        let body = fs::read_to_string(dir.path().join(&f)).unwrap();
        if f.to_string_lossy().ends_with(".json") {
            assert_eq!(serde_json::from_str::<Value>(&body).unwrap()["schema"], 1);
        }
    }
}

#[test]
fn localize_at_several_phi() {
    let (code, _, err) = run(&["localize", "--entry", "sphere_cohft", "--evaluator", "cohft_bott", "--phi", "0.5,1,2"]);
    assert_eq!(code, 0, "{err}");
}

#[test]
fn precondition_failures_exit_2() {
    assert_eq!(run(&["localize", "--entry", "free_control", "--evaluator", "berline_vergne"]).0, 2);
    assert_eq!(run(&["localize", "--entry", "degenerate_pi", "--evaluator", "dh_poisson"]).0, 2);
    assert_eq!(run(&["localize", "--entry", "sphere_dh", "--phi", "0"]).0, 2);
}

#[test]
fn config_errors_exit_3() {
    assert_eq!(run(&["localize", "--entry", "no_such_entry"]).0, 3);
    assert_eq!(run(&["localize", "--entry", "sphere_dh", "--tol", "-1"]).0, 3);
    assert_eq!(run(&["sweep", "--entry", "sphere_dh", "--order", "0"]).0, 3);
    assert_eq!(run(&["frobnicate"]).0, 3);
    assert_eq!(run(&["verify", "--module", "nonsense"]).0, 3);

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"entry": "sphere_dh", "unknown_key": 1}"#).unwrap();
    assert_eq!(run(&["localize", "--config", cfg.to_str().unwrap()]).0, 3);
    assert_eq!(run(&["localize", "--config", dir.path().join("missing.json").to_str().unwrap()]).0, 3);
}

#[test]
fn unwritable_output_directory_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let target = blocker.join("sub");
    assert_eq!(run(&["localize", "--entry", "sphere_dh", "--out-dir", target.to_str().unwrap()]).0, 3);
}

#[test]
fn sweep_outputs_csv_svg_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let (code, csv, err) = run(&[
        "sweep", "--entry", "sphere_dh", "--t-max", "2", "--t-steps", "8", "--format", "csv", "--out-dir", &dir_arg(dir.path()),
    ]);
    assert_eq!(code, 0, "{err}");
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,re_z,im_z"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 9);
    assert_eq!(rows[8][0], 2.0);

    let svg = fs::read_to_string(dir.path().join("sphere_dh_sweep.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert!(svg.trim_end().ends_with("</svg>"));
    let json: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("sphere_dh_sweep.json")).unwrap()).unwrap();
    assert_eq!(json["schema"], 1);
    // the file's CSV matches stdout, value for value
    assert_eq!(fs::read_to_string(dir.path().join("sphere_dh_sweep.csv")).unwrap(), csv);
}

#[test]
fn sweep_verdicts_drive_the_exit_code() {
    assert_eq!(run(&["sweep", "--entry", "free_control", "--t-max", "2", "--t-steps", "4"]).0, 0);
    assert_eq!(run(&["sweep", "--entry", "free_control", "--t-max", "2", "--t-steps", "4", "--expect", "closed"]).0, 1);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"entry": "sphere_dh", "t_max": 1.0, "t_steps": 2, "format": "json"}"#).unwrap();
    let (code, out, err) = run(&["sweep", "--config", cfg.to_str().unwrap(), "--t-steps", "5", "--format", "csv"]);
    assert_eq!(code, 0, "{err}");
    // csv wins over the file's json; 5 steps win over 2
    assert!(out.starts_with("t,re_z,im_z\n"));
    assert_eq!(out.lines().count(), 7);
    assert!(out.lines().last().unwrap().starts_with("1,"));
}

#[test]
fn verify_module_filter_and_fault() {
    let (code, out, err) = run(&["verify", "--module", "exterior_algebra", "--samples", "20", "--format", "json"]);
    assert_eq!(code, 0, "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["schema"], 1);
    let checks = v["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c["module"] == "exterior_algebra"));

    let (code, out, _) = run(&["verify", "--module", "geometry", "--inject-fault", "metric-perturbation", "--format", "csv"]);
    assert_eq!(code, 1);
    assert!(out.lines().next().unwrap().contains("passed"));
    assert!(out.contains("false"));
}

#[test]
fn verify_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = run(&["verify", "--module", "catalog", "--out-dir", &dir_arg(dir.path())]);
    assert_eq!(code, 0, "{err}");
    assert!(dir.path().join("verify.json").exists());
    assert!(dir.path().join("verify.txt").exists());
}

#[test]
fn binary_honours_thread_cap() {
    let bin = env!("CARGO_BIN_EXE_bvloc");
    let ok = Command::new(bin).args(["list"]).env("BVLOC_THREADS", "2").output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    for bad in ["0", "many"] {
        let out = Command::new(bin).args(["list"]).env("BVLOC_THREADS", bad).output().unwrap();
        assert_eq!(out.status.code(), Some(3), "BVLOC_THREADS={bad}");
    }
}

#[test]
fn binary_verify_is_identical_across_worker_counts() {
    let bin = env!("CARGO_BIN_EXE_bvloc");
    let outs: Vec<Vec<u8>> = ["1", "3"]
        .iter()
        .map(|t| {
            let o = Command::new(bin)
                .args(["verify", "--module", "exterior_algebra,bv_calculus", "--samples", "30", "--format", "json"])
                .env("BVLOC_THREADS", t)
                .output()
                .unwrap();
            assert_eq!(o.status.code(), Some(0));
            o.stdout
        })
        .collect();
    assert_eq!(outs[0], outs[1]);
}
