use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn wpl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wpl")).args(args).env_remove("WPL_THREADS").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn row_tokens(out: &str, n: &str, p: &str) -> Vec<String> {
    out.lines()
        .map(|l| l.split_whitespace().map(String::from).collect::<Vec<_>>())
        .find(|t| t.len() == 6 && t[0] == n && t[1] == p)
        .unwrap_or_else(|| panic!("no row n={n} p={p} in\n{out}"))
}

#[test]
fn exponent_rows() {
    let o = wpl(&["exponents", "--n", "2", "--p", "2,6"]);
    assert!(o.status.success());
    assert_eq!(row_tokens(&stdout(&o), "2", "6")[2..], ["1/6", "1/6", "1/6", "0"]);
    assert_eq!(row_tokens(&stdout(&o), "2", "2")[2..], ["0", "0", "0", "0"]);
    let o = wpl(&["exponents", "--n", "3", "--p", "4"]);
    assert_eq!(row_tokens(&stdout(&o), "3", "4")[2..], ["1/4", "1/4", "1/4", "0"]);
}

#[test]
fn exponent_below_two_is_a_usage_error() {
    let o = wpl(&["exponents", "--p", "3/2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("below 2"));
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    assert_eq!(wpl(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn bad_thread_variable_is_a_usage_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_wpl")).args(["exponents"]).env("WPL_THREADS", "many").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn dry_run_validates_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.toml");
    std::fs::write(&cfg, "").unwrap();
    let out = dir.path().join("out");
    let o = wpl(&["experiment", cfg.to_str().unwrap(), "--dry-run", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("experiment = \"sharpness\""));
    assert!(stdout(&o).contains("p = 12.0"));
    assert!(!out.exists());
}

#[test]
fn nyquist_violation_exits_with_usage_code() {
    let o = wpl(&["experiment", "--set", "experiment=decoupling", "--set", "points=64", "--set", "k_max=6", "--dry-run"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Nyquist"), "{}", stderr(&o));
}

#[test]
fn malformed_config_is_rejected_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "experiment = \"sharpness\"\nk_mx = 5\n").unwrap();
    let o = wpl(&["experiment", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("k_mx"), "{}", stderr(&o));
}

fn run_sharpness(out: &Path) -> Output {
    wpl(&["--deterministic", "experiment", "--set", "p=12", "--set", "k_max=5", "--out", out.to_str().unwrap()])
}

#[test]
fn sharpness_run_writes_records_plot_and_reproduces() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let oa = run_sharpness(a.path());
    assert!(oa.status.code() == Some(0) || oa.status.code() == Some(1), "{}", stderr(&oa));
    let stem = "sharpness-n2-p12-full-euclidean";
    let jsonl = std::fs::read_to_string(a.path().join(format!("{stem}.jsonl"))).unwrap();
    let svg = std::fs::read_to_string(a.path().join(format!("{stem}.svg"))).unwrap();
    let csv = std::fs::read_to_string(a.path().join(format!("{stem}.csv"))).unwrap();
    assert!(svg.contains("predicted slope 0.1250"));
    assert!(csv.starts_with("# config="));
    let header: Value = serde_json::from_str(jsonl.lines().next().unwrap()).unwrap();
    assert_eq!(header["config"]["k_max"], 5);

    run_sharpness(b.path());
    let again = std::fs::read_to_string(b.path().join(format!("{stem}.jsonl"))).unwrap();
    assert_eq!(jsonl, again);

    let report = wpl(&["report", a.path().to_str().unwrap()]);
    assert!(stdout(&report).contains("| ok |"), "{}", stdout(&report));

    // Any edit to the body breaks the trailer hash.
    let path = a.path().join(format!("{stem}.jsonl"));
    std::fs::write(&path, jsonl.replacen("\"k\":3", "\"k\":30", 1)).unwrap();
    let report = wpl(&["report", path.to_str().unwrap()]);
    assert_eq!(report.status.code(), Some(1));
    assert!(stdout(&report).contains("MISMATCH"));
}

#[test]
fn suite_mutation_names_the_failing_test() {
    let dir = tempfile::tempdir().unwrap();
    let summary = dir.path().join("suite.json");
    let o = wpl(&[
        "suite",
        "--set",
        "points=128",
        "--set",
        "k_min=2",
        "--set",
        "k_max=4",
        "--mutate",
        "1",
        "--out",
        summary.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("failed: partition-of-unity"), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(summary).unwrap()).unwrap();
    assert_eq!(v["passed"], false);
    assert_eq!(v["config"]["drop_sector"], 1);
    assert_eq!(v["config"]["gamma"], 2.0);
}

#[test]
fn propagated_field_roundtrips_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("u.json");
    let o = wpl(&[
        "propagate",
        "--random-annulus",
        "2",
        "--points",
        "32",
        "--t",
        "0.5",
        "--output",
        file.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let prop: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let before = prop["l2_before"].as_f64().unwrap();
    assert!((prop["l2_after"].as_f64().unwrap() / before - 1.0).abs() < 1e-12);

    let o = wpl(&["norm", "--kind", "lp", "--p", "2", "--input", file.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["value"].as_f64().unwrap() / before - 1.0).abs() < 1e-12);

    let o = wpl(&["norm", "--kind", "hfio", "--p", "4", "--input", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "missing --k must be a usage error");
}

#[test]
fn print_defaults_lists_every_experiment() {
    let o = wpl(&["experiment", "--print-defaults"]);
    let text = stdout(&o);
    for name in ["sharpness", "squarefunction", "decoupling", "local-smoothing", "suite"] {
        assert!(text.contains(&format!("## {name}")), "{name}");
    }
}
