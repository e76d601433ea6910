use std::path::Path;
use std::process::Command;

fn riskeysim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_riskeysim"))
}

fn body(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path).unwrap().lines().filter(|l| !l.starts_with('#')).map(String::from).collect()
}

const COLUMNS: &str = "sweep_value,variant,kmr_ae,kmr_ab,akr,mse_ab_dbw,stderr_kmr_ae,rounds,seed";

#[test]
fn theory_writes_one_row_per_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("curve.csv");
    let status = riskeysim()
        .args(["theory", "--beta", "0.2", "--ratio-db", "-10:10:5", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(body(&out).len(), 1 + 5);
}

#[test]
fn run_writes_the_documented_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig6.csv");
    let status = riskeysim()
        .args(["run", "--figure", "fig6", "--seed", "5", "--rounds", "40", "--rounds-per-epoch", "20", "--grid", "8"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.lines().any(|l| l.starts_with("# config_hash=sha256:")));
    let lines = body(&out);
    assert_eq!(lines[0], COLUMNS);
    assert!(lines.len() > 1);
    for row in &lines[1..] {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells.len(), 9);
        assert_eq!(cells[7], "40");
        assert_eq!(cells[8], "5");
    }
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let bad_beta = riskeysim().args(["theory", "--beta", "0.7", "--ratio-db", "0:10:5", "--out"]).arg(&out).status().unwrap();
    assert_eq!(bad_beta.code(), Some(2));

    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"no_such_field": 1}"#).unwrap();
    let unknown = riskeysim().args(["run", "--figure", "fig2", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert_eq!(unknown.code(), Some(2));

    let missing = riskeysim()
        .args(["run", "--figure", "fig2", "--config", "/nonexistent/cfg.json", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(missing.code(), Some(2));

    let one_round = riskeysim().args(["run", "--figure", "fig2", "--rounds", "1", "--out"]).arg(&out).status().unwrap();
    assert_eq!(one_round.code(), Some(2));
}

#[test]
fn validate_passes() {
    let output = riskeysim().arg("validate").output().unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stdout));
    let text = String::from_utf8(output.stdout).unwrap();
    assert_eq!(text.lines().count(), 7);
}
