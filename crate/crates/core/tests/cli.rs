use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn aniso(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aniso"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn lhs_of(csv_path: &Path, check: &str) -> f64 {
    let mut r = csv::Reader::from_path(csv_path).unwrap();
    let headers = r.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    for rec in r.records() {
        let rec = rec.unwrap();
        if &rec[col("check")] == check {
            return rec[col("lhs")].parse().unwrap();
        }
    }
    panic!("no {check} row in {}", csv_path.display());
}

#[test]
fn empty_config_exits_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.toml");
    fs::write(&cfg, "").unwrap();
    let o = aniso(&["--config", cfg.to_str().unwrap(), "check-young"], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn malformed_config_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "seed = 3\nsamples = \"many\"\n").unwrap();
    let o = aniso(&["--config", cfg.to_str().unwrap(), "check-young"], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn single_threaded_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = aniso(&["check-operator", "--samples", "300", "--seed", "7", "--jobs", "1"], &out);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read(out.join("check-operator.csv")).unwrap()
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn reilly_report_on_the_unit_disk() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = aniso(&["verify-reilly", "--domain", "disk", "--R", "1"], &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let lhs = lhs_of(&out.join("verify-reilly.csv"), "reilly");
    assert!((lhs - 16.0 * std::f64::consts::PI).abs() < 1e-6 * lhs, "{lhs}");
    let json: serde_json::Value = serde_json::from_slice(&fs::read(out.join("verify-reilly.json")).unwrap()).unwrap();
    assert_eq!(json["pass"], true);
    assert_eq!(json["command"], "verify-reilly");
}

#[test]
fn solve_writes_solution_and_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = aniso(&["solve", "--p", "3", "--h", "0.1", "--eps-ladder", "0.1,0.01"], &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["solution.csv", "mesh.node", "mesh.ele", "rungs.csv", "solve.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn polygon_reilly_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = aniso(&["verify-reilly", "--domain", "square"], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
}
