// Copyright 2026 TFGKP Contributors
// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = tfgkp::cli::run(std::iter::once("tfgkp").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn run_in(dir: &Path, args: &[&str]) -> (i32, String, String) {
    let d = dir.to_str().unwrap();
    let mut full = vec!["--out-dir", d];
    full.extend_from_slice(args);
    run(&full)
}

fn config_line(csv: &str) -> Value {
    let line = csv.lines().find_map(|l| l.strip_prefix("# config ")).expect("config comment");
    serde_json::from_str(line).unwrap()
}

#[test]
fn requirements_json_matches_the_normal_cdf_numbers() {
    let (code, out, _) = run(&["requirements", "--json"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    let r = &v["report"];
    assert!((r["dt_c_min_ps"].as_f64().unwrap() - 21.338).abs() < 1e-3);
    assert!((r["omega_r_max_ghz"].as_f64().unwrap() - 20.999).abs() < 1e-3);
    assert!((r["df_c_max_ghz"].as_f64().unwrap() - 0.1649).abs() < 1e-4);
    assert!((r["finesse"].as_f64().unwrap() - 63.66).abs() < 0.01);
}

#[test]
fn requirements_with_zero_jitter_prints_dashes() {
    let (code, out, _) = run(&["requirements", "--jitter-fwhm-ps", "0"]);
    assert_eq!(code, 0);
    assert!(out.contains('\u{2014}'));
}

#[test]
fn thresholds_config_file_sets_the_error_rate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"thresholds": {"error_rate": 0.001}}"#).unwrap();
    let (code, out, _) = run(&["--config", cfg.to_str().unwrap(), "thresholds", "--json"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["thresholds"]["error_rate"], 0.001);
    let (_, out2, _) = run(&["--config", cfg.to_str().unwrap(), "thresholds", "--json", "--error-rate", "0.02"]);
    let v2: Value = serde_json::from_str(&out2).unwrap();
    assert_eq!(v2["thresholds"]["error_rate"], 0.02);
}

#[test]
fn unknown_config_keys_and_bad_values_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"sweep": {"stepz": 3}}"#).unwrap();
    assert_eq!(run(&["--config", cfg.to_str().unwrap(), "sweep"]).0, 2);
    assert_eq!(run(&["thresholds", "--error-rate", "1.5"]).0, 2);
    assert_eq!(run(&["requirements", "--jitter-fwhm-ps", "-1"]).0, 2);
    assert_eq!(run(&["frobnicate"]).0, 2);
    assert_eq!(run(&["--config", "/nonexistent/c.json", "thresholds"]).0, 2);
    assert_eq!(run(&["--help"]).0, 0);
}

#[test]
fn sweep_writes_header_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = run_in(dir.path(), &["sweep", "--steps", "10"]);
    assert_eq!(code, 0);
    let text = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert!(lines[0].starts_with("# tfgkp "));
    assert_eq!(config_line(&text)["sweep"]["steps"], 10);
    assert!(lines[2].starts_with("df_c_ghz,"));
    assert_eq!(lines.len(), 3 + 10);
}

#[test]
fn echoed_config_reproduces_the_output() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["detect", "--detector", "frequency", "--resolution-fwhm-ghz", "0.5", "--shots", "2000", "--seed", "9"];
    assert_eq!(run_in(a.path(), &args).0, 0);
    let first = fs::read_to_string(a.path().join("detect.csv")).unwrap();
    let cfg = b.path().join("c.json");
    fs::write(&cfg, serde_json::to_string(&config_line(&first)).unwrap()).unwrap();
    assert_eq!(run_in(b.path(), &["--config", cfg.to_str().unwrap(), "detect"]).0, 0);
    let second = fs::read_to_string(b.path().join("detect.csv")).unwrap();
    assert_eq!(first, second);
}

#[test]
fn detect_is_deterministic_per_seed() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["detect", "--jitter-fwhm-ps", "5", "--shots", "3000", "--seed", "4"];
    run_in(a.path(), &args);
    run_in(b.path(), &args);
    let x = fs::read(a.path().join("detect.csv")).unwrap();
    assert_eq!(x, fs::read(b.path().join("detect.csv")).unwrap());
    run_in(b.path(), &["detect", "--jitter-fwhm-ps", "5", "--shots", "3000", "--seed", "5"]);
    assert_ne!(x, fs::read(b.path().join("detect.csv")).unwrap());
}

#[test]
fn simulate_reports_exact_success_probability() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = run_in(dir.path(), &["simulate", "--circuit", "type_i"]);
    assert_eq!(code, 0);
    assert!(out.contains("success_prob = 1/2 (exact)"), "{out}");
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("type_i_report.json")).unwrap()).unwrap();
    assert_eq!(report["report"]["exact"], true);
}

#[test]
fn simulate_fails_with_exit_one_when_expectations_miss() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = run_in(dir.path(), &["simulate", "--circuit", "type_i_prime"]);
    assert_eq!(code, 1, "{err}");
}

#[test]
fn simulate_shots_file_has_requested_rows() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = run_in(dir.path(), &["simulate", "--circuit", "hom", "--float", "--shots", "50"]);
    assert_eq!(code, 0);
    let text = fs::read_to_string(dir.path().join("hom_shots.csv")).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 51);
}

#[test]
fn strict_turns_width_warnings_into_failures() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = run_in(dir.path(), &["state", "--peak-fwhm-ghz", "6"]);
    assert_eq!(code, 0);
    assert!(out.contains("warning:"));
    let (code, _, err) = run_in(dir.path(), &["--strict", "state", "--peak-fwhm-ghz", "6"]);
    assert_eq!(code, 1);
    assert!(err.contains("error"));
    assert_eq!(run_in(dir.path(), &["--strict", "state"]).0, 0);
}

#[test]
fn state_dump_density_integrates_to_one() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = run_in(dir.path(), &["state", "--dump", "--peak", "gaussian", "--peak-fwhm-ghz", "1"]);
    assert_eq!(code, 0);
    let text = fs::read_to_string(dir.path().join("state_spectral.csv")).unwrap();
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let rows: Vec<(f64, f64)> = rdr
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].parse().unwrap(), r[3].parse().unwrap())
        })
        .collect();
    let df = rows[1].0 - rows[0].0;
    let total: f64 = rows.iter().map(|r| r.1).sum::<f64>() * df;
    assert!((total - 1.0).abs() < 1e-3, "{total}");
}

#[test]
fn binary_uses_out_dir_env_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_tfgkp");
    let s = Command::new(bin).args(["sweep", "--steps", "3"]).env("TFGKP_OUT_DIR", dir.path()).output().unwrap();
    assert!(s.status.success());
    assert!(dir.path().join("sweep.csv").exists());
    let s = Command::new(bin).args(["thresholds", "--error-rate", "2"]).output().unwrap();
    assert_eq!(s.status.code(), Some(2));
    let s = Command::new(bin).args(["simulate", "--circuit", "type_i_prime"]).current_dir(dir.path()).output().unwrap();
    assert_eq!(s.status.code(), Some(1));
}
