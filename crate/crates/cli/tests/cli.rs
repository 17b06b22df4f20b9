use std::path::Path;
use std::process::{Command, Output};

fn lrp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lrp")).args(args).env("RUST_LOG", "warn").output().unwrap()
}

fn ok(args: &[&str]) {
    let out = lrp(args);
    assert!(out.status.success(), "lrp {args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn default_pipeline_gives_full_tau_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["synth", "--out", s(d)]);
    ok(&["ingest", "--log", s(&d.join("log.tsv")), "--out", s(d)]);
    ok(&[
        "extract",
        "--sessions",
        s(&d.join("sessions.jsonl")),
        "--referrers",
        s(&d.join("referrers.tsv")),
        "--out",
        s(d),
    ]);
    ok(&["tau-matrix", "--graphs", s(&d.join("graphs")), "--out", s(d)]);
    let csv = std::fs::read_to_string(d.join("tau_matrix.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 9);
    assert_eq!(rows[0], ["graph", "google", "yahoo", "bing", "homepage", "facebook", "twitter", "reddit", "full"]);
    for (i, row) in rows[1..].iter().enumerate() {
        assert_eq!(row.len(), 9);
        assert_eq!(row[i + 1], "1");
    }
    assert!(d.join("config.toml").exists());
}

#[test]
fn full_rings_on_a_saturating_graph_end_at_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("global.tsv"), "a\tb\t1\nb\tc\t2\nc\td\t1\nd\ta\t1\nc\ta\t3\n").unwrap();
    std::fs::write(d.join("local.tsv"), "a\tb\t5\n").unwrap();
    let graph = format!("local={}", s(&d.join("local.tsv")));
    ok(&["rings", "--graph", &graph, "--global", s(&d.join("global.tsv")), "--strategy", "full", "--out", s(d)]);
    let csv = std::fs::read_to_string(d.join("rings.csv")).unwrap();
    let last: Vec<&str> = csv.lines().last().unwrap().split(',').collect();
    assert_eq!(last[3], "4");
    let tau: f64 = last[5].parse().unwrap();
    assert!((tau - 1.0).abs() <= 1e-9, "{tau}");
}

#[test]
fn feature_schema_lists_62_rows() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["features", "--schema", "--out", s(dir.path())]);
    let csv = std::fs::read_to_string(dir.path().join("feature_schema.csv")).unwrap();
    assert_eq!(csv.lines().count(), 63);
}

#[test]
fn out_dir_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_lrp"))
        .args(["features", "--schema"])
        .env("LRP_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("feature_schema.csv").exists());
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("exp.toml"), "seed = 11\nalpha = 0.5\n").unwrap();
    ok(&["features", "--schema", "--config", s(&d.join("exp.toml")), "--seed", "12", "--out", s(d)]);
    let echo = std::fs::read_to_string(d.join("config.toml")).unwrap();
    assert!(echo.contains("seed = 12"));
    assert!(echo.contains("alpha = 0.5"));
}

#[test]
fn exit_codes_distinguish_failures() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let code = |args: &[&str]| lrp(args).status.code();

    assert_eq!(code(&["ingest", "--log", s(&d.join("missing.tsv")), "--out", s(d)]), Some(3));
    assert_eq!(code(&["features", "--schema", "--config", s(&d.join("missing.toml")), "--out", s(d)]), Some(3));

    std::fs::write(d.join("bad.toml"), "alpha = 2.0\n").unwrap();
    assert_eq!(code(&["features", "--schema", "--config", s(&d.join("bad.toml")), "--out", s(d)]), Some(4));
    std::fs::write(d.join("typo.toml"), "sede = 1\n").unwrap();
    assert_eq!(code(&["features", "--schema", "--config", s(&d.join("typo.toml")), "--out", s(d)]), Some(4));
    assert_eq!(code(&["rings", "--strategy", "half", "--out", s(d)]), Some(4));

    // a graph too small for the jackknife fails inside the module
    std::fs::write(d.join("tiny.tsv"), "a\tb\t1\n").unwrap();
    let graph = format!("tiny={}", s(&d.join("tiny.tsv")));
    assert_eq!(code(&["jackknife", "--graph", &graph, "--out", s(d)]), Some(5));
}
