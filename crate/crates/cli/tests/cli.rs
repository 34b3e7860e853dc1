// End-to-end behavior of the binary: exit codes, artifact layout, config
// precedence, and custom input formats.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fresh_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pedforce-cli-{}-{name}", std::process::id()));
    if dir.exists() {
        std::fs::remove_dir_all(&dir).unwrap();
    }
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn pedforce(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pedforce"));
    cmd.args(args).env_clear();
    for (key, value) in envs {
        cmd.env(key, value);
    }
    cmd.output().expect("binary should run")
}

fn manifest_setting(dir: &Path, subcommand: &str, key: &str) -> String {
    let raw = std::fs::read_to_string(dir.join(format!("manifest-{subcommand}.json"))).unwrap();
    let json: serde_json::Value = serde_json::from_str(&raw).unwrap();
    json["settings"][key].as_str().unwrap().to_string()
}

#[test]
fn unknown_subcommand_exits_2() {
    let out = pedforce(&["frobnicate"], &[]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("Usage"), "usage text expected, got: {stderr}");
}

#[test]
fn evaluate_writes_all_artifacts() {
    let dir = fresh_dir("artifacts");
    let out = pedforce(&["evaluate", "--out", dir.to_str().unwrap()], &[]);
    assert!(out.status.success());
    for file in ["metrics.csv", "metrics.json", "manifest-evaluate.json"] {
        assert!(dir.join(file).is_file(), "{file} missing");
    }
    let csv = std::fs::read_to_string(dir.join("metrics.csv")).unwrap();
    assert!(csv.starts_with("subset,ade_k,fde_k,nc,num_windows,k,gamma\n"));
    assert_eq!(csv.lines().count(), 6, "header plus one row per bundled subset");
}

#[test]
fn subset_filter_limits_rows() {
    let dir = fresh_dir("subset");
    let out = pedforce(
        &["evaluate", "--out", dir.to_str().unwrap(), "--subset", "eth,zara1"],
        &[],
    );
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.join("metrics.csv")).unwrap();
    let subsets: Vec<&str> =
        csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(subsets, ["eth", "zara1"]);
}

#[test]
fn flag_beats_env_beats_config_file() {
    let dir = fresh_dir("precedence");
    let config = dir.join("sweep.conf");
    std::fs::write(&config, "gamma = 0.5\nseed = 11\n").unwrap();
    let out_str = dir.to_str().unwrap().to_string();
    let config_str = config.to_str().unwrap().to_string();

    // Config file alone.
    let out = pedforce(&["evaluate", "--out", &out_str, "--config", &config_str], &[]);
    assert!(out.status.success());
    assert_eq!(manifest_setting(&dir, "evaluate", "gamma"), "0.5");
    assert_eq!(manifest_setting(&dir, "evaluate", "seed"), "11");

    // Environment beats the config file.
    let out = pedforce(
        &["evaluate", "--out", &out_str, "--config", &config_str],
        &[("PEDFORCE_GAMMA", "0.3")],
    );
    assert!(out.status.success());
    assert_eq!(manifest_setting(&dir, "evaluate", "gamma"), "0.3");

    // A flag beats both.
    let out = pedforce(
        &["evaluate", "--out", &out_str, "--config", &config_str, "--gamma", "0.2"],
        &[("PEDFORCE_GAMMA", "0.3")],
    );
    assert!(out.status.success());
    assert_eq!(manifest_setting(&dir, "evaluate", "gamma"), "0.2");
}

#[test]
fn invalid_numeric_names_the_field() {
    let out = pedforce(&["evaluate", "--tau", "0"], &[]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("tau"), "error should name the field, got: {stderr}");
}

#[test]
fn custom_column_order_parses() {
    let dir = fresh_dir("format");
    let data = dir.join("data");
    std::fs::create_dir_all(&data).unwrap();
    // y comes before x in this export; one walker, 20 frames.
    let mut lines = String::new();
    for frame in 0..20 {
        let x = 0.5 * frame as f64;
        lines.push_str(&format!("{frame} 7 1.0 {x}\n"));
    }
    std::fs::write(data.join("mini.txt"), lines).unwrap();

    let out = pedforce(
        &[
            "ingest",
            "--dataset-dir",
            data.to_str().unwrap(),
            "--format",
            "cols=frame,id,y,x",
            "--out",
            dir.to_str().unwrap(),
        ],
        &[],
    );
    assert!(out.status.success(), "{out:?}");
    let counts = std::fs::read_to_string(dir.join("counts.csv")).unwrap();
    assert!(counts.contains("mini,1,,"), "one window expected, got: {counts}");
}

#[test]
fn report_requires_prior_evaluate() {
    let dir = fresh_dir("report-empty");
    let out = pedforce(&["report", "--out", dir.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("evaluate"), "hint to run evaluate expected, got: {stderr}");
}

#[test]
fn report_pivots_metrics_with_average_column() {
    let dir = fresh_dir("report");
    let out_str = dir.to_str().unwrap();
    assert!(pedforce(&["evaluate", "--out", out_str, "--subset", "eth,hotel"], &[])
        .status
        .success());
    let out = pedforce(&["report", "--out", out_str], &[]);
    assert!(out.status.success());
    let report = std::fs::read_to_string(dir.join("report.csv")).unwrap();
    let mut lines = report.lines();
    assert_eq!(lines.next().unwrap(), "metric,eth,hotel,avg");
    let ade_row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(ade_row[0], "ade_k");
    let a: f64 = ade_row[1].parse().unwrap();
    let b: f64 = ade_row[2].parse().unwrap();
    let avg: f64 = ade_row[3].parse().unwrap();
    assert!((avg - (a + b) / 2.0).abs() < 1e-12);
}
