use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const COS20: &str = r#"{"builtin":"cosine","amplitude":0.05,"lattice":{"a":[6.283185307179586,0],"b":[0,6.283185307179586]},"resolution":[32,32]}"#;
const COS: &str = r#"{"builtin":"cosine","amplitude":1.0,"lattice":{"a":[6.283185307179586,0],"b":[0,6.283185307179586]},"resolution":[32,32]}"#;
const ZERO: &str = r#"{"builtin":"constant","value":0.0,"lattice":{"a":[1,0],"b":[0,1]},"resolution":[4,4]}"#;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_horocusp"))
        .current_dir(dir)
        .env_remove("HOROCUSP_JOBS")
        .args(args)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, body: &str) {
    std::fs::write(dir.join(name), body).unwrap();
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn check_exit_codes() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "cos20.json", COS20);
    write(dir.path(), "cos.json", COS);

    let ok = run(dir.path(), &["check", "cos20.json"]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(json(&ok)["passed"], true);

    let bad = run(dir.path(), &["check", "cos.json", "-o", "r.json"]);
    assert_eq!(bad.status.code(), Some(1));
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(r["passed"], false);
    assert_eq!(r["witness"].as_array().unwrap().len(), 3);
}

#[test]
fn dist_on_the_flat_torus() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "zero.json", ZERO);
    let out = run(dir.path(), &["dist", "zero.json", "--from", "0,0", "--to", "1,0", "--witness", "w.csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out)["result"]["value"].as_f64().unwrap();
    assert!((v - 1.0).abs() < 1e-3);
    let csv = std::fs::read_to_string(dir.path().join("w.csv")).unwrap();
    assert!(csv.starts_with("s,x1,x2,u,exp_minus_u\n"));
    assert!(csv.lines().count() >= 3);

    let q = run(dir.path(), &["dist", "zero.json", "--from", "0,0", "--to", "1,0", "--quotient"]);
    assert_eq!(q.status.code(), Some(0));
    assert_eq!(json(&q)["result"]["value"].as_f64().unwrap(), 0.0);
}

#[test]
fn numbers_carry_seventeen_digits() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "zero.json", ZERO);
    let out = run(dir.path(), &["dist", "zero.json", "--from", "0,0", "--to", "0.3,0.4"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("5.0000000000000000e-1"), "{text}");
}

#[test]
fn input_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "bad.json", "{\"builtin\": \"cosine\",\n  \"amplitude\": 1,\n  oops }");
    write(dir.path(), "unknown.json", r#"{"builtin": "sine", "lattice": {"a": [1, 0], "b": [0, 1]}, "resolution": [4, 4]}"#);

    let bad = run(dir.path(), &["check", "bad.json"]);
    assert_eq!(bad.status.code(), Some(2));
    let err = String::from_utf8_lossy(&bad.stderr);
    assert!(err.contains("line 3 column 3"), "{err}");

    let unknown = run(dir.path(), &["check", "unknown.json"]);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("sine"));

    let missing = run(dir.path(), &["check", "nope.json"]);
    assert_eq!(missing.status.code(), Some(2));

    let flag = run(dir.path(), &["--quad-tol", "2", "check", "bad.json"]);
    assert_eq!(flag.status.code(), Some(2));
}

#[test]
fn jobs_come_from_the_environment() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "zero.json", ZERO);
    let out = Command::new(env!("CARGO_BIN_EXE_horocusp"))
        .current_dir(dir.path())
        .env("HOROCUSP_JOBS", "0")
        .args(["check", "zero.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let ok = Command::new(env!("CARGO_BIN_EXE_horocusp"))
        .current_dir(dir.path())
        .env("HOROCUSP_JOBS", "2")
        .args(["check", "zero.json"])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn matrix_output_is_deterministic_across_job_counts() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "zero.json", ZERO);
    let a = run(dir.path(), &["--k", "3", "--jobs", "1", "matrix", "zero.json", "--csv", "a.csv"]);
    let b = run(dir.path(), &["--k", "3", "--jobs", "3", "matrix", "zero.json", "--csv", "b.csv"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(
        std::fs::read(dir.path().join("a.csv")).unwrap(),
        std::fs::read(dir.path().join("b.csv")).unwrap()
    );
}
