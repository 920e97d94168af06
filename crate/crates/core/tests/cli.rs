//! End-to-end checks of the `aiet` binary: exit codes, output formats and thread-count independence.

mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::fixture_path;

fn aiet(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_aiet"));
    cmd.args(args);
    if let Some(t) = threads {
        cmd.env("AIET_THREADS", t);
    }
    cmd.output().expect("binary runs")
}

fn run_fixture(command: &str, name: &str, extra: &[&str]) -> Output {
    let path = fixture_path(name);
    let mut args = vec![command, path.to_str().unwrap()];
    args.extend_from_slice(extra);
    aiet(&args, None)
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn temp_file(name: &str, contents: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("aiet-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn classify_reports_genus_and_class() {
    let out = run_fixture("classify", "d4_unstable", &[]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["genus"], 2);
    assert_eq!(v["class"], "unstable");
    assert_eq!(v["alpha_omega"], "undefined");
    let v = json(&run_fixture("classify", "golden_stable", &[]));
    assert_eq!(v["class"], "stable");
    assert!(v["alpha_omega"].is_number());
}

#[test]
fn non_hyperbolic_classify_succeeds_with_undefined_class() {
    let out = run_fixture("classify", "nonhyperbolic", &[]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["hyperbolic"], false);
    assert_eq!(v["class"], "undefined");
}

#[test]
fn non_hyperbolic_dims_is_a_precondition_failure() {
    assert_eq!(run_fixture("dims", "nonhyperbolic", &[]).status.code(), Some(3));
}

#[test]
fn reducible_permutation_is_invalid_input() {
    assert_eq!(run_fixture("classify", "reducible", &[]).status.code(), Some(2));
}

#[test]
fn malformed_files_are_invalid_input() {
    let unknown = temp_file("unknown.json", r#"{"alphabet": "AB", "top": "AB", "bottom": "BA", "loop": "tb", "extra": 1}"#);
    let broken = temp_file("broken.json", "{\"alphabet\": \"AB\",\n  \"top\": ");
    let open = temp_file("open.json", r#"{"alphabet": "ABC", "top": "ABC", "bottom": "CBA", "loop": "t"}"#);
    for path in [&unknown, &broken, &open, &Path::new("/nonexistent/aiet.json").to_path_buf()] {
        let out = aiet(&["classify", path.to_str().unwrap()], None);
        assert_eq!(out.status.code(), Some(2), "{}", path.display());
    }
    let out = aiet(&["classify", broken.to_str().unwrap()], None);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn unknown_tolerance_and_bad_thread_count_are_invalid_input() {
    assert_eq!(run_fixture("dims", "golden", &["--tol-override", "nonsense=1"]).status.code(), Some(2));
    let path = fixture_path("golden");
    assert_eq!(aiet(&["dims", path.to_str().unwrap()], Some("zero")).status.code(), Some(2));
}

#[test]
fn unstable_simulation_and_sweep_are_precondition_failures() {
    assert_eq!(run_fixture("simulate", "d4_unstable", &["--length", "1000"]).status.code(), Some(3));
    assert_eq!(run_fixture("sweep", "d4_unstable", &[]).status.code(), Some(3));
}

#[test]
fn unstable_dims_use_flags() {
    let v = json(&run_fixture("dims", "d4_unstable", &[]));
    assert_eq!(v["dim_invariant"], 0.0);
    assert_eq!(v["dim_conformal"], "unknown");
    let v = json(&run_fixture("holder", "d4_unstable", &[]));
    assert_eq!(v["h_exp"], 0.0);
    assert_eq!(v["hinv_exp"], "undefined");
}

#[test]
fn stable_holder_exponents_are_infinite() {
    let v = json(&run_fixture("holder", "golden_stable", &[]));
    assert_eq!(v["h_exp"], "infinity");
    assert_eq!(v["hinv_exp"], "infinity");
}

#[test]
fn json_keys_keep_a_fixed_order() {
    let out = run_fixture("simulate", "d3_central", &["--length", "10000"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let keys: Vec<&str> = text.lines().filter_map(|l| l.trim().split('"').nth(1)).collect();
    assert_eq!(keys, ["side", "seed", "length", "batches", "chains", "estimate", "stderr", "closed_form", "z_score"]);
    assert!(text.ends_with("}\n"));
}

#[test]
fn sweep_writes_csv_and_sidecar() {
    let out_path = std::env::temp_dir().join(format!("aiet-sweep-{}.csv", std::process::id()));
    let out = run_fixture("sweep", "d3_central", &["--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(&out_path).unwrap();
    assert!(!csv.contains('\r'));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,rho,rho_prime,G,H,dim_mu,dim_nu,relation_residual"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 61);
    assert!(rows.iter().all(|r| r.split(',').count() == 8));
    let zero_row = rows.iter().find(|r| r.starts_with("0,")).expect("t = 0 row");
    assert!(zero_row.ends_with(",undefined"));
    let meta_path = format!("{}.meta.json", out_path.display());
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&meta_path).unwrap()).unwrap();
    assert_eq!(meta["bounds_hold"], true);
    assert_eq!(meta["mu_decreasing_on_positive"], true);
    let _ = std::fs::remove_file(&out_path);
    let _ = std::fs::remove_file(&meta_path);
}

#[test]
fn sweep_without_out_prints_csv() {
    let out = run_fixture("sweep", "golden", &[]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("t,rho,"));
    assert_eq!(text.lines().count(), 102);
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let path = fixture_path("d4_central");
    let path = path.to_str().unwrap();
    for args in [vec!["simulate", path, "--length", "200000", "--seed", "3"], vec!["sweep", path]] {
        let one = aiet(&args, Some("1"));
        let four = aiet(&args, Some("4"));
        assert_eq!(one.status.code(), Some(0));
        assert_eq!(one.stdout, four.stdout);
    }
}

#[test]
fn seed_option_overrides_file_seed() {
    let a = json(&run_fixture("simulate", "d3_central", &["--length", "10000"]));
    let b = json(&run_fixture("simulate", "d3_central", &["--length", "10000", "--seed", "42"]));
    let c = json(&run_fixture("simulate", "d3_central", &["--length", "10000", "--seed", "43", "--side", "conformal"]));
    assert_eq!(a, b);
    assert_eq!(c["seed"], 43);
    assert_eq!(c["side"], "conformal");
}
