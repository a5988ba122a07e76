use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;
use xxz_gge::qalgebra::omega_closed_form;
use xxz_gge::spectral::AnisotropyParams;

const SMALL: &[&str] = &["--grid", "64", "--kmax", "31", "--nmax", "10", "--tol", "1e-10"];

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xxz-gge")).arg("-q").args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn omega_table_matches_closed_form() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("omega.csv");
    let o = run(&["omega", "--delta", "2", "--twos", "1", "--grid", "16", "--out", path_str(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("lambda,omega"));
    let p = AnisotropyParams::new(2.0).unwrap();
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 16);
    for (lambda, omega) in rows {
        let exact = omega_closed_form(1, lambda, &p).unwrap();
        assert!((omega - exact).abs() < 1e-10 * exact.abs());
    }
    let manifest = read_json(&dir.path().join("omega.csv.manifest.json"));
    assert_eq!(manifest["outputs"][0]["bytes"], text.len() as u64);
}

#[test]
fn missing_out_is_a_usage_error() {
    assert_eq!(code(&run(&["omega", "--delta", "2", "--twos", "1"])), 2);
}

#[test]
fn invalid_parameters_are_usage_errors() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("qa.json");
    assert_eq!(code(&run(&["qa-solve", "--delta", "2", "--tol", "0", "--out", path_str(&out)])), 2);
    assert_eq!(code(&run(&["qa-solve", "--delta", "0.5", "--out", path_str(&out)])), 2);
    assert!(!out.exists());
}

#[test]
fn qa_solve_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let mut args = vec!["qa-solve", "--delta", "2", "--out", path_str(p)];
        args.extend_from_slice(SMALL);
        assert_eq!(code(&run(&args)), 0);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let state = read_json(&a);
    assert_eq!(state["converged"], true);
    assert_eq!(state["n_max"], 10);
    assert_eq!(state["meta"]["solver"], "qa");
}

#[test]
fn iteration_cap_writes_partial_state() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("partial.json");
    let mut args = vec!["qa-solve", "--delta", "2", "--max-iter", "3", "--out", path_str(&out)];
    args.extend_from_slice(SMALL);
    assert_eq!(code(&run(&args)), 3);
    assert_eq!(read_json(&out)["converged"], false);
    let manifest = read_json(&dir.path().join("partial.json.manifest.json"));
    assert_eq!(manifest["runs"][0]["converged"], false);
}

#[test]
fn zero_threshold_fails_verification() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("verify.csv");
    let mut args = vec!["verify-identity", "--delta", "2", "--smax", "1,2", "--threshold", "0", "--out", path_str(&out)];
    args.extend_from_slice(SMALL);
    let o = run(&args);
    assert_eq!(code(&o), 4);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("two_s,rel_linf_error,fourier_tail,status\n"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn verification_passes_at_default_threshold() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("verify.csv");
    let mut args = vec!["verify-identity", "--delta", "2", "--smax", "1,2", "--out", path_str(&out)];
    args.extend_from_slice(SMALL);
    assert_eq!(code(&run(&args)), 0);
}

#[test]
fn gge_seeded_from_itself_and_compared() {
    let dir = TempDir::new().unwrap();
    let qa = dir.path().join("qa.json");
    let gge = dir.path().join("gge.json");
    let again = dir.path().join("again.json");
    let mut args = vec!["qa-solve", "--delta", "2", "--out", path_str(&qa)];
    args.extend_from_slice(SMALL);
    assert_eq!(code(&run(&args)), 0);
    let mut args = vec!["gge-solve", "--delta", "2", "--sbar", "2", "--out", path_str(&gge)];
    args.extend_from_slice(SMALL);
    assert_eq!(code(&run(&args)), 0);
    let state = read_json(&gge);
    assert_eq!(state["meta"]["solver"], "gge");
    assert_eq!(state["meta"]["two_sbar"], 2);

    let mut args = vec!["gge-solve", "--delta", "2", "--sbar", "2", "--seed", path_str(&gge), "--out", path_str(&again)];
    args.extend_from_slice(SMALL);
    assert_eq!(code(&run(&args)), 0);
    assert!(read_json(&again)["meta"]["iterations"].as_u64().unwrap() <= 2);

    let table = dir.path().join("levels.csv");
    let o = Command::new(env!("CARGO_BIN_EXE_xxz-gge"))
        .args(["compare", path_str(&gge), path_str(&qa), "--out", path_str(&table)])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.starts_with("delta_metric "));
    assert_eq!(std::fs::read_to_string(&table).unwrap().lines().count(), 11);
}

#[test]
fn scan_writes_one_row_per_point() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("scan.csv");
    let mut args = vec!["scan", "--delta-list", "2", "--sbar-list", "1,2", "--out", path_str(&out)];
    args.extend_from_slice(SMALL);
    assert_eq!(code(&run(&args)), 0);
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "delta,two_sbar,delta_metric,stacked_metric");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("2.0000000000000000e0,1,"));
}
