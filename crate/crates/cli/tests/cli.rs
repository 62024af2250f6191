use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use halfspace_cli::config::{RunConfig, OUTPUT_DIR_ENV};
use halfspace_cli::output::BRANCH_HEADER;
use serde_json::Value;
use tempfile::TempDir;

const REFERENCE: &str = r#"{
  "problem": {"N": 1, "p": 3, "mu": {"kind": "point_mass", "mass": 1}, "kappa": 1.2},
  "exponents": {"q": 4, "alpha": 0},
  "grid": {"R": 20, "H": 20, "nodes_lateral": 2, "nodes_height": 1000, "grading": 2},
  "solver": {"tol": 1e-8, "max_iter": 100000, "blowup_cap": 1e6},
  "continuation": {"start_kappa": 0.2, "step": 0.05, "max_points": 400},
  "seed": 3
}"#;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_halfspace"));
    cmd.env_remove(OUTPUT_DIR_ENV);
    cmd
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str], config: &Path, out: &Path) -> Output {
    bin()
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--output-dir")
        .arg(out)
        .output()
        .unwrap()
}

fn summary(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn exponents_prints_exact_critical_values() {
    let out = bin().args(["exponents", "--N", "11", "--p", "5"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("p_S=13/9"), "{text}");
    assert!(text.contains("p_JL=(37+8√10)/9"), "{text}");
    assert!(text.contains("admissibility scan"));
    let bad = bin().args(["exponents", "--N", "3", "--p", "0.5"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn kappa_star_brackets_the_threshold() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", REFERENCE);
    let out = tmp.path().join("out");
    assert_eq!(run(&["kappa-star"], &cfg, &out).status.code(), Some(0));
    let s = summary(&out);
    let lower = s["results"]["kappa_star"]["lower"].as_f64().unwrap();
    let upper = s["results"]["kappa_star"]["upper"].as_f64().unwrap();
    assert!(lower < upper);
    assert!(lower < 2f64.sqrt() && 2f64.sqrt() < upper);
    assert_eq!(s["seed"], 3);
    assert_eq!(s["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn branch_output_is_deterministic() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", REFERENCE);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(run(&["branch"], &cfg, &a).status.success());
    assert!(run(&["branch"], &cfg, &b).status.success());
    let csv = fs::read(a.join("branch.csv")).unwrap();
    assert_eq!(csv, fs::read(b.join("branch.csv")).unwrap());
    assert_eq!(fs::read(a.join("summary.json")).unwrap(), fs::read(b.join("summary.json")).unwrap());

    let text = String::from_utf8(csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(BRANCH_HEADER));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert!(rows.iter().enumerate().all(|(i, r)| r.len() == 7 && r[0] == i.to_string()));
    assert_eq!(rows.iter().filter(|r| r[6] == "true").count(), 1);

    let s = summary(&a);
    let fold = s["results"]["fold_kappa"].as_f64().unwrap();
    assert!((fold - 2f64.sqrt()).abs() < 5e-3);
    assert!(s["results"]["lambda_crossing_index"].as_u64().is_some());
    assert_eq!(s["results"]["points"].as_u64().unwrap() as usize, rows.len());
}

#[test]
fn config_echo_reproduces_the_run() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", REFERENCE);
    let out = tmp.path().join("out");
    assert!(run(&["solve"], &cfg, &out).status.success());
    let s = summary(&out);
    let echoed = serde_json::to_string(&s["config"]).unwrap();
    assert_eq!(RunConfig::from_json(&echoed).unwrap(), RunConfig::from_json(REFERENCE).unwrap());
    let sol = fs::read_to_string(out.join("solution_1.2.csv")).unwrap();
    assert_eq!(sol.lines().next(), Some("x_N,u"));
    assert_eq!(sol.lines().count(), 1001);
    assert_eq!(s["results"]["status"], "converged");
}

#[test]
fn divergence_exits_with_one() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", REFERENCE);
    let out = run(&["solve", "--kappa", "2.0"], &cfg, &tmp.path().join("out"));
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(summary(&tmp.path().join("out"))["results"]["status"], "diverged");
}

#[test]
fn bad_configs_exit_with_two() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let malformed = write_config(tmp.path(), "m.json", "{\n  \"problem\": {\n");
    let res = run(&["solve"], &malformed, &out);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("line"));

    let unknown = write_config(tmp.path(), "u.json", &REFERENCE.replace("\"seed\": 3", "\"seed\": 3, \"threads\": 4"));
    let res = run(&["solve"], &unknown, &out);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("threads"));

    let range = write_config(tmp.path(), "r.json", &REFERENCE.replace("\"grading\": 2", "\"grading\": 0.5"));
    assert_eq!(run(&["solve"], &range, &out).status.code(), Some(2));

    let missing = tmp.path().join("absent.json");
    assert_eq!(run(&["solve"], &missing, &out).status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn unwritable_output_exits_with_one() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", REFERENCE);
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "").unwrap();
    let res = run(&["kappa-star"], &cfg, &blocker.join("out"));
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("file"));
}

#[test]
fn output_directory_falls_back_to_the_environment() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", REFERENCE);
    let env_dir = tmp.path().join("from-env");
    let status = bin()
        .args(["eigen", "--kappa", "0.5", "--config"])
        .arg(&cfg)
        .env(OUTPUT_DIR_ENV, &env_dir)
        .status()
        .unwrap();
    assert!(status.success());
    let s = summary(&env_dir);
    assert!(s["results"]["lambda"].as_f64().unwrap() > 1.0);
}

#[test]
fn verify_kernels_writes_a_report_array() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", REFERENCE);
    let out = tmp.path().join("out");
    let res = run(&["verify", "--suite", "kernels"], &cfg, &out);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let reports: Value = serde_json::from_str(&fs::read_to_string(out.join("verify.json")).unwrap()).unwrap();
    let arr = reports.as_array().unwrap();
    assert!(!arr.is_empty());
    assert!(arr.iter().all(|r| r["passed"] == true));
    let printed: Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(printed, reports);
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    assert_eq!(bin().arg("plot").status().unwrap().code(), Some(2));
    assert_eq!(halfspace_cli::run_command(["halfspace", "--version"]), 0);
}
