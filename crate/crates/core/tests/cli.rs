use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn write_config(dir: &Path, amp: f64, extra: &str) -> std::path::PathBuf {
    let out = dir.join("out");
    let text = format!(
        r#"
[grid]
k_max = 8
n_r = 256
r_max = 60.0
{extra}

[seed]
udot = ["gauss amp={amp:?} x0=0.3 y0=0.0 w=1.0"]
u = ["gauss amp={amp:?} x0=0.0 y0=0.2 w=1.0"]
b = 0.0

[output]
dir = "{}"
"#,
        out.display()
    );
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path
}

fn s1c(args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_s1c"))
        .args(args)
        .env("RUST_LOG", "error")
        .env_remove("SOLVER_TOL")
        .env_remove("SOLVER_MAX_ITER")
        .status()
        .unwrap()
        .code()
        .unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn solve_succeeds_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 0.1, "");
    assert_eq!(s1c(&["solve", cfg.to_str().unwrap()]), 0);
    let out = dir.path().join("out");
    let v = json(&out.join("solution.json"));
    assert_eq!(v["status"], "converged");
    assert!(v["alpha"].as_f64().unwrap() > 0.0);
    for f in [
        "lambda_tilde.csv",
        "H11_tilde.csv",
        "H12_tilde.csv",
        "tau_rescaled.csv",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn malformed_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 0.1, "delta = 0.3");
    assert_eq!(s1c(&["solve", cfg.to_str().unwrap()]), 1);
    let missing = dir.path().join("nope.toml");
    assert_eq!(s1c(&["solve", missing.to_str().unwrap()]), 1);
}

#[test]
fn oversized_seed_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 10.0, "");
    assert_eq!(s1c(&["solve", cfg.to_str().unwrap()]), 2);
    let v = json(&dir.path().join("out/solution.json"));
    assert_eq!(v["status"], "failed");
}

#[test]
fn sweep_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 1.0, "");
    let code = s1c(&["sweep", cfg.to_str().unwrap(), "--amplitudes", "0.05,0.1"]);
    assert_eq!(code, 0);
    let csv = fs::read_to_string(dir.path().join("out/sweep.csv")).unwrap();
    assert!(csv.starts_with("a,alpha,"));
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 3);
}

#[test]
fn verify_reports_all_checks() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 0.1, "");
    assert_eq!(s1c(&["verify", cfg.to_str().unwrap()]), 0);
    let v = json(&dir.path().join("out/verify.json"));
    assert_eq!(v["all_pass"], true);
    assert!(v["checks"].as_array().unwrap().len() >= 8);
}
