//! Black-box tests of the command-line interface: exit codes, certificate
//! output, trace shape, and config-file precedence.

use std::process::{Command, Output};

use blowcert::certificate::parse_certificate;
use blowcert::blowup::RunStatus;

fn blowcert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blowcert"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 output")
}

#[test]
fn list_is_stable_and_lexicographic() {
    let first = blowcert(&["list"]);
    let second = blowcert(&["list"]);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(stdout(&first), stdout(&second));
    let text = stdout(&first);
    assert!(text.contains("kk-simple"));
    assert!(text.contains("fvks(d,N)"));
    assert!(text.contains("d >= 1"));
    let ids: Vec<&str> = text
        .lines()
        .filter_map(|l| l.strip_prefix("  "))
        .collect();
    let mut sorted = ids.clone();
    sorted.sort_unstable();
    assert_eq!(ids, sorted, "reference ids must list lexicographically");
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["validate"][..],
        &["validate", "--problem", "nosuch"],
        &["validate", "--problem", "kk-simple", "--x0=0.1"],
        &["validate", "--problem", "kk-simple", "--x0=0.1,0.2", "--y0=0.1,0.2"],
        &["validate", "--problem", "kk-simple"],
        &["validate", "--problem", "kk-simple", "--x0=0.1,0.2", "--eps-override", "-1"],
        &["validate", "--problem", "fvks"],
        &["validate", "--problem", "kk-simple", "--chart", "dir:9:+", "--x0=0.1,0.2"],
        &["nosuchcommand"],
    ] {
        let out = blowcert(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}: {out:?}");
    }
}

#[test]
fn validate_writes_a_wellformed_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cert.json");
    let out = blowcert(&[
        "validate",
        "--problem",
        "kk-simple",
        "--chart",
        "para",
        "--x0=-0.1,-0.1",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = std::fs::read_to_string(&path).unwrap();
    let doc = parse_certificate(&text).unwrap();
    assert_eq!(doc.problem(), "kk-simple");
    assert_eq!(doc.status(), RunStatus::Succeeded);
    let t_max = doc.t_max().expect("successful run reports t_max");
    assert!(t_max.lo() > 6.0 && t_max.hi() < 6.5, "{t_max:?}");
    assert_eq!(doc.to_string_pretty(), text, "round trip identity");
}

#[test]
fn trace_emits_the_documented_columns() {
    let out = blowcert(&[
        "trace",
        "--problem",
        "kk-simple",
        "--chart",
        "para",
        "--x0=-0.1,-0.1",
        "--tau-max",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = stdout(&out);
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    // 1 tau column, 2 time bounds, then lo/hi per coordinate in both spaces.
    assert_eq!(header.split(',').count(), 3 + 2 * 2 + 2 * 2);
    assert_eq!(header.split(',').next(), Some("tau"));
    let mut rows = 0;
    for line in lines {
        assert_eq!(line.split(',').count(), 11, "{line}");
        rows += 1;
    }
    assert!(rows > 0, "a positive budget yields rows");
}

#[test]
fn zero_budget_trace_is_header_only() {
    let out = blowcert(&[
        "trace",
        "--problem",
        "kk-simple",
        "--x0=-0.1,-0.1",
        "--tau-max",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    assert_eq!(stdout(&out).lines().count(), 1);
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(
        &path,
        "problem = \"kk-simple\"\nx0 = [-0.1, -0.1]\ntau_max = 1.0\n",
    )
    .unwrap();
    let from_file = blowcert(&["trace", "--config", path.to_str().unwrap()]);
    assert_eq!(from_file.status.code(), Some(0), "{from_file:?}");
    assert!(stdout(&from_file).lines().count() > 1);

    let overridden = blowcert(&[
        "trace",
        "--config",
        path.to_str().unwrap(),
        "--tau-max",
        "0",
    ]);
    assert_eq!(overridden.status.code(), Some(0), "{overridden:?}");
    assert_eq!(stdout(&overridden).lines().count(), 1, "flag beats file");

    let bad = blowcert(&["trace", "--config", "/no/such/file.toml"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn chart_sign_violation_fails_cleanly() {
    // A directional chart over the negative side cannot hold this state.
    let out = blowcert(&[
        "validate",
        "--problem",
        "kk-simple",
        "--chart",
        "dir:1:+",
        "--y0=-0.5,0.1",
    ]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");
    let doc = parse_certificate(&stdout(&out)).unwrap();
    assert!(matches!(doc.status(), RunStatus::Failed(_)));
}
