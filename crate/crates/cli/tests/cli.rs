use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

struct Run {
    out: Output,
    dir: PathBuf,
    _tmp: TempDir,
}

impl Run {
    fn code(&self) -> i32 {
        self.out.status.code().unwrap_or(-1)
    }

    fn stdout(&self) -> String {
        String::from_utf8_lossy(&self.out.stdout).into_owned()
    }

    fn stderr(&self) -> String {
        String::from_utf8_lossy(&self.out.stderr).into_owned()
    }

    fn json(&self) -> Value {
        let text = fs::read_to_string(self.dir.join("result.json")).unwrap();
        serde_json::from_str(&text).unwrap()
    }

    fn file(&self, name: &str) -> Vec<u8> {
        fs::read(self.dir.join(name)).unwrap()
    }
}

fn fracmax(config: Option<&str>, args: &[&str]) -> Run {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path().join("out");
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fracmax"));
    if let Some(text) = config {
        let path = tmp.path().join("config.json");
        fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.arg("--out").arg(&dir).args(args);
    let out = cmd.output().unwrap();
    Run {
        out,
        dir,
        _tmp: tmp,
    }
}

fn write_tmp(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn strip_metadata(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("metadata");
    v
}

fn schema_errors(doc: &Value) -> Vec<String> {
    let text = include_str!("../schema/result.schema.json");
    let schema: Value = serde_json::from_str(text).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    validator
        .iter_errors(doc)
        .map(|e| format!("{} at {}", e, e.instance_path))
        .collect()
}

const SMALL: &str = r#"{"domain": [[0, 1]], "h": 0.0714285714285714285, "s": 0.5, "beta": 0.357142857142857142, "restarts": 10}"#;
const TWO: &str = r#"{"domain": [[-1.25, -0.25], [0.25, 1.25]], "h": 0.125, "s": 0.5, "beta": 0.25, "restarts": 4}"#;

#[test]
fn validate_defaults() {
    let r = fracmax(None, &["validate"]);
    assert_eq!(r.code(), 0, "{}\n{}", r.stdout(), r.stderr());
    assert!(r.stdout().contains("pass"));
    assert!(!r.stdout().contains("FAIL"));
}

#[test]
fn config_errors_exit_2_and_name_the_field() {
    let r = fracmax(
        Some(r#"{"domain": [[0, 1]], "h": 0.1, "s": 1.5, "beta": 0.3}"#),
        &["solve"],
    );
    assert_eq!(r.code(), 2);
    assert!(r.stderr().contains("`s`"), "{}", r.stderr());

    let r = fracmax(
        Some(r#"{"domain": [[0, 1]], "h": -0.1, "s": 0.5, "beta": 0.3}"#),
        &["solve"],
    );
    assert_eq!(r.code(), 2);
    assert!(r.stderr().contains("`h`"), "{}", r.stderr());

    let r = fracmax(
        Some(r#"{"domain": [[0, 1], [0.5, 2]], "h": 0.1, "s": 0.5, "beta": 0.3}"#),
        &["solve"],
    );
    assert_eq!(r.code(), 2);

    let r = fracmax(
        Some(r#"{"domain": [[0, 1]], "h": 0.1, "s": 0.5, "beta": 5}"#),
        &["maximize"],
    );
    assert_eq!(r.code(), 2);

    let r = fracmax(Some("{not json"), &["solve"]);
    assert_eq!(r.code(), 2);
}

#[test]
fn malformed_rhs_reports_line() {
    let tmp = TempDir::new().unwrap();
    let f = write_tmp(tmp.path(), "f.csv", "x,f\n0.05,1\n0.15,oops\n");
    let r = fracmax(
        Some(r#"{"domain": [[0, 0.2]], "h": 0.1, "s": 0.5, "beta": 0.1}"#),
        &["solve", "--f", f.to_str().unwrap()],
    );
    assert_eq!(r.code(), 2);
    assert!(r.stderr().contains("line 3"), "{}", r.stderr());

    let f = write_tmp(tmp.path(), "short.csv", "1\n");
    let r = fracmax(
        Some(r#"{"domain": [[0, 0.2]], "h": 0.1, "s": 0.5, "beta": 0.1}"#),
        &["solve", "--f", f.to_str().unwrap()],
    );
    assert_eq!(r.code(), 2);
}

#[test]
fn solve_torsion_midpoint() {
    let cfg = r#"{"domain": [[-1, 1]], "h": 0.00390625, "s": 0.5, "beta": 1}"#;
    let r = fracmax(Some(cfg), &["solve"]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let doc = r.json();
    let u_mid = doc["result"]["u_mid"].as_f64().unwrap();
    let exact = 1.0 / std::f64::consts::PI;
    assert!((u_mid - exact).abs() / exact < 0.01, "u_mid {u_mid}");
    let csv = String::from_utf8(r.file("u.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("x,u"));
    assert_eq!(csv.lines().count(), 513);
    assert!(schema_errors(&doc).is_empty(), "{:?}", schema_errors(&doc));
}

#[test]
fn solve_zero_rhs_and_file_input() {
    let tmp = TempDir::new().unwrap();
    let f = write_tmp(tmp.path(), "f.csv", "0\n0\n0\n0\n");
    let cfg = r#"{"domain": [[0, 0.4]], "h": 0.1, "s": 0.3, "beta": 0.1, "solver": "iterative"}"#;
    let r = fracmax(Some(cfg), &["solve", "--f", f.to_str().unwrap()]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let doc = r.json();
    assert_eq!(doc["result"]["energy"].as_f64(), Some(0.0));
    assert_eq!(doc["result"]["method"], "iterative");
}

#[test]
fn full_mass_selects_everything() {
    let cfg = r#"{"domain": [[0, 1]], "h": 0.125, "s": 0.4, "beta": 1}"#;
    let r = fracmax(Some(cfg), &["maximize"]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let doc = r.json();
    let f = doc["result"]["f_hat"].as_array().unwrap();
    assert!(f.iter().all(|v| v.as_f64() == Some(1.0)));
    assert_eq!(doc["result"]["iterations"].as_u64(), Some(1));
}

#[test]
fn maximize_agrees_with_brute() {
    let a = fracmax(Some(SMALL), &["maximize"]);
    let b = fracmax(Some(SMALL), &["brute"]);
    assert_eq!(a.code(), 0, "{}", a.stderr());
    assert_eq!(b.code(), 0, "{}", b.stderr());
    let (da, db) = (a.json(), b.json());
    assert_eq!(da["mass"]["k"].as_u64(), Some(5));
    let ea = da["result"]["energy"].as_f64().unwrap();
    let eb = db["result"]["energy"].as_f64().unwrap();
    assert!((ea - eb).abs() <= 1e-9 * eb);
    for doc in [&da, &db] {
        assert!(schema_errors(doc).is_empty(), "{:?}", schema_errors(doc));
    }
    let trace = String::from_utf8(a.file("trace.csv")).unwrap();
    assert!(trace.starts_with("iter,energy\n"));
}

#[test]
fn brute_budget_exit_3() {
    let cfg = r#"{"domain": [[0, 1]], "h": 0.025, "s": 0.5, "beta": 0.5, "brute_limit": 1000}"#;
    let r = fracmax(Some(cfg), &["brute"]);
    assert_eq!(r.code(), 3, "{}", r.stderr());
}

#[test]
fn strict_mode_fails_on_nonconvergence() {
    let cfg = r#"{"domain": [[0, 2]], "h": 0.0625, "s": 0.5, "beta": 0.6, "max_iter": 1, "restarts": 1, "init": "random"}"#;
    let lax = fracmax(Some(cfg), &["maximize"]);
    assert_eq!(lax.code(), 0, "{}", lax.stderr());
    assert_eq!(lax.json()["result"]["converged"], Value::Bool(false));
    let strict = fracmax(Some(cfg), &["--strict", "maximize"]);
    assert_eq!(strict.code(), 1);
    assert!(strict.stderr().contains("strict"));
}

#[test]
fn sweep_and_twoball_outputs() {
    let cfg =
        r#"{"domain": [[0, 1]], "h": 0.0625, "s": [0.25, 0.5, 0.75], "beta": 0.25, "restarts": 3}"#;
    let r = fracmax(Some(cfg), &["sweep"]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let doc = r.json();
    assert_eq!(doc["result"]["rows"].as_array().unwrap().len(), 3);
    assert!(schema_errors(&doc).is_empty(), "{:?}", schema_errors(&doc));
    let csv = String::from_utf8(r.file("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);

    let r = fracmax(Some(TWO), &["--dump-matrix", "twoball"]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let doc = r.json();
    assert!(schema_errors(&doc).is_empty(), "{:?}", schema_errors(&doc));
    let fr = doc["result"]["fractions"].as_array().unwrap();
    let total: f64 = fr.iter().map(|v| v.as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);
    let matrix = String::from_utf8(r.file("matrix.csv")).unwrap();
    assert_eq!(matrix.lines().count(), 16);
}

#[test]
fn twoball_needs_two_intervals() {
    let r = fracmax(Some(SMALL), &["twoball"]);
    assert_eq!(r.code(), 2);
}

#[test]
fn results_do_not_depend_on_thread_count() {
    for (cfg, cmd) in [(SMALL, "maximize"), (SMALL, "brute"), (TWO, "twoball")] {
        let a = fracmax(Some(cfg), &["--threads", "1", "--seed", "7", cmd]);
        let b = fracmax(Some(cfg), &["--threads", "4", "--seed", "7", cmd]);
        assert_eq!(a.code(), 0, "{}", a.stderr());
        assert_eq!(b.code(), 0, "{}", b.stderr());
        assert_eq!(strip_metadata(a.json()), strip_metadata(b.json()), "{cmd}");
        for name in ["u.csv", "f.csv", "trace.csv"] {
            assert_eq!(a.file(name), b.file(name), "{cmd} {name}");
        }
    }
}

#[test]
fn schema_rejects_tampered_documents() {
    let r = fracmax(Some(SMALL), &["maximize"]);
    let mut doc = r.json();
    assert!(schema_errors(&doc).is_empty());
    doc["schema_version"] = Value::from("other/9");
    assert!(!schema_errors(&doc).is_empty());
    let mut doc = r.json();
    doc["result"].as_object_mut().unwrap().remove("energy");
    assert!(!schema_errors(&doc).is_empty());
}
