use std::path::Path;
use std::process::{Command, Output};

use wgqed::cli::config::RunConfig;
use wgqed::cli::output::parse_spectrum_csv;

fn wgqed(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wgqed"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn config_line(csv: &str) -> RunConfig {
    let line = csv.lines().find_map(|l| l.strip_prefix("# config: ")).unwrap();
    serde_json::from_str(line).unwrap()
}

#[test]
fn figure_fig5a_writes_both_curves() {
    let dir = tempfile::tempdir().unwrap();
    let out = wgqed(&["figure", "fig5a", "--out-dir", ".", "--plot"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let tm11 = std::fs::read_to_string(dir.path().join("fig5a_tm11.csv")).unwrap();
    let cc = std::fs::read_to_string(dir.path().join("fig5a_cc.csv")).unwrap();
    let peak_r = |csv: &str| {
        csv.lines()
            .filter_map(|l| l.strip_prefix("# peak: "))
            .map(|l| {
                let field = l.split(' ').find_map(|f| f.strip_prefix("total_R=")).unwrap();
                field.parse::<f64>().unwrap()
            })
            .fold(0.0, f64::max)
    };
    assert!(peak_r(&cc) >= 1.0 - 1e-6);
    assert!(peak_r(&tm11) < 1.0 - 1e-3);
    let grid_max = parse_spectrum_csv(&tm11)
        .unwrap()
        .iter()
        .filter_map(|r| r.values.map(|v| v.total_r))
        .fold(0.0, f64::max);
    assert!(grid_max < 1.0);
    let script = std::fs::read_to_string(dir.path().join("fig5a.gp")).unwrap();
    assert!(script.contains("'fig5a_tm11.csv'") && script.contains("'fig5a_cc.csv'"));
    assert_eq!(config_line(&cc).points, 4000);
}

#[test]
fn reflectance_from_config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.json"),
        r#"{"e_min": 3.7, "e_max": 6.0, "points": 50, "incident": {"mode": [1, 1]},
            "output": {"format": "csv", "path": "scan.csv"}, "emit_plot_script": true}"#,
    )
    .unwrap();
    let out = wgqed(&["reflectance", "--config", "run.json", "--g2", "0.02"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("scan.csv")).unwrap();
    let cfg = config_line(&csv);
    assert_eq!(cfg.g_squared, 0.02);
    assert_eq!(cfg.points, 50);
    let rows = parse_spectrum_csv(&csv).unwrap();
    assert_eq!(rows.len(), 50);
    assert!(rows.iter().all(|r| r.values.is_some()));
    assert!(dir.path().join("scan.gp").exists());
}

#[test]
fn json_output_has_config_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = wgqed(&["reflectance", "--points", "20", "--format", "json"], dir.path());
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["rows"].as_array().unwrap().len(), 20);
    assert_eq!(doc["config"]["points"], 20);
}

#[test]
fn unknown_config_key_exits_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), r#"{"e_mni": 3.7}"#).unwrap();
    let out = wgqed(&["reflectance", "--config", "bad.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let record: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(record["error"], "InvalidInput");
    assert!(record["message"].as_str().unwrap().contains("e_mni"));
}

#[test]
fn domain_error_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = wgqed(&["channels", "--energy", "2.2360679774997898"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    let record: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(record["error"], "CutoffSingularity");
}

#[test]
fn terahertz_sizing_is_self_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let out = wgqed(&["physical", "--frequency", "1000e9"], dir.path());
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let b = doc["result"]["computed_b"].as_f64().unwrap();
    assert!(b > 200e-6 && b < 230e-6, "{b}");
    let a = doc["result"]["computed_a"].as_f64().unwrap();
    assert!((a - 2.0 * b).abs() < 1e-18);
}
