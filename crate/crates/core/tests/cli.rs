use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn winocheck(args: &[&str], out: &Path) -> Output {
    let config = fixtures().join("run.toml");
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_winocheck"));
    cmd.args(args)
        .arg("--config")
        .arg(&config)
        .arg("--output-dir")
        .arg(out)
        .env_remove("WINOCHECK_SCORER_ENDPOINT");
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn ok(args: &[&str], out: &Path) -> String {
    let o = winocheck(args, out);
    assert!(o.status.success(), "{args:?} failed: {}", stderr(&o));
    stdout(&o)
}

#[test]
fn full_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    assert!(ok(&["ingest"], out).contains("wsc\t23 instances"));
    let pairs = ok(&["pairs"], out);
    assert!(pairs.contains("wsc\t22 paired instances\t11 groups"), "{pairs}");
    assert!(pairs.contains("wsc-na\t20 paired instances\t10 groups"), "{pairs}");
    let counts = ok(&["transform"], out);
    assert!(
        counts.contains("winogrande\tzero-shot\t10 produced\t2 skipped\tmulti-word special=2"),
        "{counts}"
    );
    let table = ok(&["eval"], out);
    assert!(table.contains("winogrande  zero-shot    8/12"), "{table}");
    let report = ok(
        &["report", "--compare-reference", "--reference-model", "bert-base"],
        out,
    );
    assert!(report.contains("56.52"), "{report}");
    assert!(out.join("report/comparison.txt").is_file());
    assert!(out.join("report/results.jsonl").is_file());
}

#[test]
fn stage_order_is_enforced() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let o = winocheck(&["pairs"], out);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("run `ingest` first"), "{}", stderr(&o));

    ok(&["ingest"], out);
    let o = winocheck(&["transform"], out);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).contains("pairs manifest for wsc not found"),
        "{}",
        stderr(&o)
    );

    ok(&["pairs"], out);
    let o = winocheck(&["eval", "--setup", "zero-shot"], out);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("run `transform` first"), "{}", stderr(&o));

    let o = winocheck(&["report"], out);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("run `eval` first"), "{}", stderr(&o));
}

#[test]
fn transform_single_mode() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    ok(&["ingest"], out);
    ok(&["pairs"], out);
    let counts = ok(&["transform", "--mode", "part-sent"], out);
    assert_eq!(counts.lines().count(), 3, "{counts}");
    assert!(out.join("transform/wsc.part-sent.jsonl").is_file());
    assert!(!out.join("transform/wsc.no-cands.jsonl").exists());
}

#[test]
fn unreachable_scorer_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    ok(&["ingest"], out);
    ok(&["pairs"], out);
    let port = std::net::TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap()
        .port();
    let endpoint = format!("http://127.0.0.1:{port}");
    let o = winocheck(
        &[
            "eval",
            "--setup",
            "original",
            "--scorer",
            "http",
            "--endpoint",
            &endpoint,
        ],
        out,
    );
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("after 3 attempts"), "{}", stderr(&o));

    let config = fixtures().join("run.toml");
    let o = Command::new(env!("CARGO_BIN_EXE_winocheck"))
        .args(["eval", "--setup", "original", "--scorer", "http", "--config"])
        .arg(&config)
        .arg("--output-dir")
        .arg(out)
        .env("WINOCHECK_SCORER_ENDPOINT", &endpoint)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn http_without_endpoint_is_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    ok(&["ingest"], out);
    ok(&["pairs"], out);
    let o = winocheck(&["eval", "--setup", "original", "--scorer", "http"], out);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("WINOCHECK_SCORER_ENDPOINT"), "{}", stderr(&o));
}

#[test]
fn splits_and_bound() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    ok(&["ingest"], out);
    let listing = ok(&["splits"], out);
    assert_eq!(listing.lines().count(), 3);
    for k in 0..3 {
        let raw = std::fs::read_to_string(out.join(format!("splits/winogrande.seed-{k}.json"))).unwrap();
        winocheck::harness::read_split_manifest(&raw).unwrap();
    }
    let o = winocheck(&["splits", "--sizes", "0,5,20"], out);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(
        err.contains("available pool of 10") && err.contains("train 13") && err.contains("holdout 3"),
        "{err}"
    );
}

#[test]
fn aggregate_runs_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let runs = out.join("runs.jsonl");
    let lines = [
        r#"{"model":"albert-xxlarge","size":0,"seed":0,"single":0.5555,"group":0.1723}"#,
        r#"{"model":"albert-xxlarge","size":1000,"seed":0,"single":0.62,"group":0.43}"#,
        r#"{"model":"albert-xxlarge","size":1000,"seed":1,"single":0.63,"group":0.43}"#,
    ];
    std::fs::write(&runs, lines.join("\n")).unwrap();
    let o = winocheck(&["splits", "--aggregate", runs.to_str().unwrap()], out);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = stdout(&o);
    assert!(table.contains("62.50 (0.71)"), "{table}");
    assert!(table.contains("warning: albert-xxlarge size 1000: 2 of 3"), "{table}");
    let tsv = std::fs::read_to_string(out.join("splits/curve.tsv")).unwrap();
    assert!(tsv.starts_with("# config_hash="));
}

#[test]
fn usage_error_exits_with_one() {
    let o = Command::new(env!("CARGO_BIN_EXE_winocheck"))
        .arg("frobnicate")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    let o = Command::new(env!("CARGO_BIN_EXE_winocheck"))
        .arg("--help")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
}
