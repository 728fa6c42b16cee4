//! Exit codes and artifacts of the command-line binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn config_path(name: &str) -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "..", "..", "configs", name].iter().collect()
}

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adhesive-plate"))
        .arg("--out-dir")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn simulate_then_certify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let config = config_path("minimal.toml");
    let sim = run(dir.path(), &["simulate", config.to_str().unwrap()]);
    assert_eq!(sim.status.code(), Some(0), "{}", String::from_utf8_lossy(&sim.stderr));
    let cert: serde_json::Value = serde_json::from_slice(&sim.stdout).unwrap();
    assert_eq!(cert["passed"], true);
    let csv = dir.path().join("trajectory.csv");
    assert!(csv.exists() && dir.path().join("certification.json").exists());

    let certify = run(dir.path(), &["certify", csv.to_str().unwrap()]);
    assert_eq!(certify.status.code(), Some(0), "{}", String::from_utf8_lossy(&certify.stderr));
}

#[test]
fn certify_fails_on_a_broken_balance() {
    let dir = tempfile::tempdir().unwrap();
    let config = config_path("minimal.toml");
    assert_eq!(run(dir.path(), &["simulate", config.to_str().unwrap()]).status.code(), Some(0));
    let csv = dir.path().join("trajectory.csv");
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_owned).collect();
    let header: Vec<&str> = lines[0].split(',').collect();
    let column = header.iter().position(|&h| h == "K").unwrap();
    let last = lines.len() - 1;
    let mut cells: Vec<String> = lines[last].split(',').map(str::to_owned).collect();
    cells[column] = "1.0".into();
    lines[last] = cells.join(",");
    std::fs::write(&csv, lines.join("\n") + "\n").unwrap();
    assert_eq!(run(dir.path(), &["certify", csv.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn bad_configuration_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[mesh]\nnx = 3\n").unwrap();
    let out = run(dir.path(), &["simulate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let missing = dir.path().join("missing.toml");
    assert_eq!(run(dir.path(), &["simulate", missing.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn invalid_dt_override_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = config_path("minimal.toml");
    let out = run(dir.path(), &["--dt", "-1", "simulate", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
