use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_schottky"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn circles_file(genus: usize, pairs: &[[f64; 6]]) -> String {
    let circles: Vec<Value> = pairs
        .iter()
        .map(|c| serde_json::json!({"cx": c[0], "cy": c[1], "r": c[2], "cx2": c[3], "cy2": c[4], "r2": c[5]}))
        .collect();
    serde_json::json!({"genus": genus, "circles": circles}).to_string()
}

fn g2(dir: &TempDir) -> PathBuf {
    write(dir, "g2.json", &circles_file(2, &[[-10.0, 0.0, 1.0, 10.0, 0.0, 1.0], [0.0, -7.0, 1.0, 0.0, 7.0, 1.0]]))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn dimension_reports_a_bracket() {
    let dir = TempDir::new().unwrap();
    let out = run(&["dimension", "--input", s(&g2(&dir)), "--max-word-len", "6"]);
    let v = json(&out);
    assert_eq!(v["subcommand"], "dimension");
    assert_eq!(v["parameters"]["N"], 6);
    assert_eq!(v["input_sha256"].as_str().unwrap().len(), 64);
    let (lo, hi) = (v["result"]["lower"].as_f64().unwrap(), v["result"]["upper"].as_f64().unwrap());
    assert!(0.0 < lo && lo <= hi && hi < 1.0);
}

#[test]
fn payload_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let input = g2(&dir);
    let a = json(&run(&["bounds", "--input", s(&input), "-N", "5"]));
    let b = json(&bin().env("SCHOTTKY_THREADS", "1").args(["bounds", "--input", s(&input), "-N", "5"]).output().unwrap());
    assert_eq!(serde_json::to_string(&a["result"]).unwrap(), serde_json::to_string(&b["result"]).unwrap());
    let c = json(&run(&["period-matrix", "--input", s(&input), "-N", "5"]));
    let d = json(&bin().env("SCHOTTKY_THREADS", "3").args(["period-matrix", "--input", s(&input), "-N", "5"]).output().unwrap());
    assert_eq!(c["result"], d["result"]);
}

#[test]
fn period_matrix_writes_to_out() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("p.json");
    let r = run(&["period-matrix", "--input", s(&g2(&dir)), "-N", "5", "--out", s(&out), "--probe=-9,0"]);
    assert!(r.status.success());
    assert!(r.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    let res = &v["result"];
    assert_eq!(res["genus"], 2);
    assert_eq!(res["re"].as_array().unwrap().len(), 2);
    assert!(res["tail_bound"].as_f64().unwrap() < 1e-6);
    assert_eq!(res["certificate"]["N"], 5);
}

#[test]
fn gate_failure_exits_3() {
    let dir = TempDir::new().unwrap();
    // three pairs of nearly tangent disks around the unit circle
    let pairs: Vec<[f64; 6]> = (0..3)
        .map(|k| {
            let t = std::f64::consts::PI * k as f64 / 3.0;
            let (x, y) = (t.cos(), t.sin());
            [-x, -y, 0.49, x, y, 0.49]
        })
        .collect();
    let input = write(&dir, "g3.json", &circles_file(3, &pairs));
    let r = run(&["period-matrix", "--input", s(&input), "-N", "8"]);
    assert_eq!(r.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&r.stderr).contains("convergence gate"));
}

#[test]
fn domain_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let overlap = write(&dir, "o.json", &circles_file(2, &[[-1.0, 0.0, 1.0, 1.0, 0.0, 1.0], [0.0, -1.0, 1.0, 0.0, 1.0, 1.0]]));
    let r = run(&["validate", "--input", s(&overlap)]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("intersect"));

    let nan = write(&dir, "nan.json", r#"{"genus":1,"generators":[[[NaN,0],[0,0],[0,0],[1,0]]]}"#);
    assert_eq!(run(&["validate", "--input", s(&nan)]).status.code(), Some(2));
    let extra = write(&dir, "extra.json", r#"{"genus":1,"generators":[[[2,0],[0,0],[0,0],[0.5,0]]],"bogus":1}"#);
    assert_eq!(run(&["validate", "--input", s(&extra)]).status.code(), Some(2));
    let parabolic = write(&dir, "par.json", r#"{"genus":1,"generators":[[[1,0],[1,0],[0,0],[1,0]]]}"#);
    assert_eq!(run(&["dimension", "--input", s(&parabolic)]).status.code(), Some(2));
    assert_eq!(run(&["inequality-suite", "--g-min", "1"]).status.code(), Some(2));
    assert_eq!(run(&["dimension", "--input", s(&parabolic), "-N", "0"]).status.code(), Some(2));
}

#[test]
fn missing_file_is_io() {
    assert_eq!(run(&["validate", "--input", "/nonexistent/g.json"]).status.code(), Some(1));
}

#[test]
fn validate_reports_ping_pong() {
    let dir = TempDir::new().unwrap();
    let v = json(&run(&["validate", "--input", s(&g2(&dir)), "--seed", "7"]));
    let res = &v["result"];
    assert_eq!(res["classical_verified"], true);
    assert_eq!(res["validation"]["ping_pong"]["seed"], 7);
    assert_eq!(res["validation"]["ping_pong"]["failures"], 0);
    assert_eq!(res["loxodromic"].as_array().unwrap().len(), 2);

    let g1 = write(&dir, "g1.json", r#"{"genus":1,"generators":[[[2,0],[0,0],[0,0],[0.5,0]]]}"#);
    let v = json(&run(&["validate", "--input", s(&g1)]));
    assert_eq!(v["result"]["genus"], 1);
    assert!(v["result"]["validation"].is_null());
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn limit_set_row_counts() {
    let dir = TempDir::new().unwrap();
    let out = run(&["limit-set", "--input", s(&g2(&dir)), "-N", "2"]);
    assert!(out.status.success());
    let rows = csv_rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows.len(), 16);
    // every point lies in one of the closed disks
    let disks = [(-10.0, 0.0), (10.0, 0.0), (0.0, -7.0), (0.0, 7.0)];
    for row in &rows {
        let (x, y): (f64, f64) = (row[0].parse().unwrap(), row[1].parse().unwrap());
        assert!(disks.iter().any(|&(cx, cy)| ((x - cx).powi(2) + (y - cy).powi(2)).sqrt() <= 1.0 + 1e-12), "{row:?}");
    }

    let g1 = write(&dir, "g1.json", r#"{"genus":1,"generators":[[[2,0],[0,0],[0,0],[0.5,0]]]}"#);
    let out = run(&["limit-set", "--input", s(&g1), "-N", "3"]);
    let rows = csv_rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows.len(), 6);
    for row in rows {
        let at_zero = row[0].parse::<f64>().map(|x| x == 0.0).unwrap_or(false);
        assert!(at_zero || row[0] == "inf", "{row:?}");
    }
}

#[test]
fn limit_set_atoms_carry_weights() {
    let dir = TempDir::new().unwrap();
    let out = run(&["limit-set", "--input", s(&g2(&dir)), "-N", "3", "--atoms"]);
    assert!(out.status.success());
    let rows = csv_rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows.len(), 4 + 12 + 36);
    let total: f64 = rows.iter().map(|r| r[2].parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn suite_csv() {
    let out = run(&["inequality-suite", "--g-min", "2", "--g-max", "100"]);
    assert!(out.status.success());
    let rows = csv_rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows.len(), 4 * 99);
    assert!(rows.iter().filter(|r| r[1] == "i").all(|r| r[5] == "true"));
    assert_eq!(rows.iter().filter(|r| r[1] == "i").count(), 99);
}
