use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

use polydisc_cli::checks::REGISTRY;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_polydisc"))
}

fn bundled(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn polydisc")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn scenario(checks: &str, generator: &str) -> String {
    format!(
        r#"{{"schema": "polydisc.scenario/1", "name": "t", "seed": 3, "regime": "mixed", "generator": {generator}, "checks": {checks}}}"#
    )
}

fn without_timing(mut v: Value) -> Value {
    for c in v["checks"].as_array_mut().unwrap() {
        c.as_object_mut().unwrap().remove("elapsed_ms");
    }
    v
}

#[test]
fn smoke_scenario_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = run(&[
        "run",
        bundled("norm-identity-smoke.json").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["schema"], "polydisc.report/1");
    assert_eq!(report["overall"], "pass");
    assert_eq!(report["scenario"]["name"], "norm-identity-smoke");
    assert!(report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["status"] == "pass"));
}

#[test]
fn unknown_check_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "s.json", &scenario(r#"["frobnicate"]"#, "{}"));
    let o = run(&["run", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("frobnicate"));
}

#[test]
fn malformed_and_missing_files_are_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "s.json", "{ not json");
    assert_eq!(run(&["run", p.to_str().unwrap()]).status.code(), Some(2));
    let missing = dir.path().join("absent.json");
    assert_eq!(
        run(&["run", missing.to_str().unwrap()]).status.code(),
        Some(2)
    );
}

#[test]
fn basis_cap_overflow_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "s.json",
        &scenario(r#"["kernel-calculus"]"#, r#"{"degree": 10, "vars": 3}"#),
    );
    let o = bin()
        .args(["run", p.to_str().unwrap()])
        .env("POLYDISC_BASIS_CAP", "50")
        .output()
        .unwrap();
    assert_eq!(
        o.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn failing_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let checks = r#"[{"name": "non-principal-obstruction", "tol": 2.0}]"#;
    let p = write(dir.path(), "s.json", &scenario(checks, r#"{"degree": 4}"#));
    let o = run(&["run", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("overall: fail"));
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let checks = r#"["tuple-validation", "norm-identity", "mobius-involution", "charfn-identity", "kernel-calculus", "product-formula"]"#;
    let p = write(dir.path(), "s.json", &scenario(checks, r#"{"degree": 8}"#));
    let mut reports = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("r{i}.json"));
        let o = run(&[
            "run",
            p.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--quiet",
        ]);
        assert_eq!(o.status.code(), Some(0));
        assert!(o.stdout.is_empty());
        let v: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
        reports.push(without_timing(v));
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn regime_mismatch_skips() {
    let dir = tempfile::tempdir().unwrap();
    let body =
        scenario(r#"["hermitian-sqrt", "kernel-calculus"]"#, "{}").replace("mixed", "matrix");
    let p = write(dir.path(), "s.json", &body);
    let out = dir.path().join("r.json");
    let o = run(&["run", p.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["checks"][0]["status"], "pass");
    assert_eq!(v["checks"][1]["status"], "skipped");
    assert_eq!(v["checks"][1]["residual"], Value::Null);
}

#[test]
fn list_checks_covers_registry() {
    let o = run(&["list-checks"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), REGISTRY.len());
    let line = |name: &str| {
        lines
            .iter()
            .find(|l| l.starts_with(&format!("{name} ")))
            .copied()
    };
    assert!(line("norm-identity").unwrap().contains("[norm identity]"));
    assert!(line("quotient-model")
        .unwrap()
        .contains("[quotient module characterization]"));
    for c in REGISTRY {
        assert!(line(c.name).is_some(), "{} missing", c.name);
    }
}

#[test]
fn suite_aggregates_worst_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "a.json",
        &scenario(r#"["hermitian-sqrt"]"#, "{}"),
    );
    let o = run(&["suite", dir.path().to_str().unwrap(), "--quiet"]);
    assert_eq!(o.status.code(), Some(0));
    write(dir.path(), "b.json", &scenario(r#"["frobnicate"]"#, "{}"));
    write(dir.path(), "notes.txt", "ignored");
    let o = run(&["suite", dir.path().to_str().unwrap(), "--quiet"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stdout).contains("2 scenarios"));
}

#[test]
fn bundled_scenarios_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let mut count = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        polydisc_cli::Scenario::load(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        count += 1;
    }
    assert!(count >= 5);
}
