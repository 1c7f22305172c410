use std::path::Path;
use std::process::{Command, Output};

fn refvw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_refvw")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn run_prints_canonical_result() {
    let o = refvw(&["run", "shifted_cotangent_P1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("result:   s^-1 * (-1 - s^2)"), "{out}");
    assert!(out.contains("t=1:      -2"), "{out}");
}

#[test]
fn run_json_has_the_documented_fields() {
    let o = refvw(&["--json", "run", "gt_horizontal_n1", "--bind", "P2=2"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for key in ["scenario", "label", "bindings", "result_canonical", "t1_value", "symmetric", "golden_match", "checks"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["bindings"]["P2"], 2);
    assert_eq!(v["golden_match"], true);
}

#[test]
fn series_lists_coefficients() {
    let o = refvw(&["series", "gt_series", "--order", "2", "--bind", "P2=1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("q^0:") && out.contains("q^2:"), "{out}");
}

#[test]
fn quiet_check_reports_a_single_verdict() {
    let o = refvw(&["--quiet", "check", "--filter", "quantum"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 1);
    assert!(out.starts_with("PASS:"), "{out}");
}

#[test]
fn identities_for_given_ranks() {
    let o = refvw(&["identities", "--r0", "2", "--r1", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("PASS r0=2 r1=3"));
}

#[test]
fn broken_golden_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let src = include_str!("../../core/scenarios/shifted_cotangent_P1.toml").replace("-qint(2)", "qint(2)");
    std::fs::write(Path::new(dir.path()).join("sc.toml"), src).unwrap();
    let d = dir.path().to_str().unwrap();
    let o = refvw(&["--scenario-dir", d, "check", "--filter", "shifted"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL shifted_cotangent_P1 golden"), "{}", stdout(&o));
}

#[test]
fn errors_exit_two() {
    let o = refvw(&["run", "no_such_scenario"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown scenario"));
    assert_eq!(refvw(&["run", "shifted_cotangent_P1", "--bind", "x=1"]).status.code(), Some(2));
    assert_eq!(refvw(&["check", "--filter", "zzz"]).status.code(), Some(2));
}
