use std::io::Write;
use std::process::{Command, Output};

use classify_cli::report::Report;

fn classify(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_classify"))
        .args(args)
        .output()
        .expect("spawn classify")
}

fn write_temp(contents: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(contents.as_bytes()).unwrap();
    f
}

#[test]
fn json_report_round_trips() {
    let out = classify(&["exact", "--data", "small10", "--format", "json"]);
    assert!(out.status.success());
    let report: Report = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report.dataset.n, 10);
    let table = &report.analyses[0].k_table;
    assert_eq!(table.len(), 10);
    assert!((table.iter().map(|r| r.probability).sum::<f64>() - 1.0).abs() < 1e-9);
    let again = serde_json::to_string_pretty(&report).unwrap() + "\n";
    assert_eq!(again.as_bytes(), &out.stdout[..]);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = [
        "compare",
        "--data",
        "small10",
        "--methods",
        "exact,m1,m2,ward",
        "--iters",
        "5000",
        "--burnin",
        "500",
        "--seed",
        "11",
        "--format",
        "json",
    ];
    let a = classify(&args);
    let b = classify(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn timing_is_opt_in() {
    let plain = classify(&["exact", "--data", "small10", "--format", "json"]);
    assert!(!String::from_utf8_lossy(&plain.stdout).contains("\"timing\""));
    let timed = classify(&["exact", "--data", "small10", "--format", "json", "--timing"]);
    let report: Report = serde_json::from_slice(&timed.stdout).unwrap();
    assert_eq!(report.timing.unwrap().len(), 1);
}

#[test]
fn parse_error_exits_2() {
    let f = write_temp("1.0\n2.5\nabc\n");
    let out = classify(&["exact", "--data", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn bad_flags_exit_2() {
    assert_eq!(classify(&["exact"]).status.code(), Some(2));
    let out = classify(&["mcmc", "--data", "small10", "--q", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = classify(&["exact", "--data", "small10", "--c", "-1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn infeasible_enumeration_exits_3() {
    let values: String = (0..30).map(|i| format!("{}\n", i as f64 * 0.37)).collect();
    let f = write_temp(&values);
    let out = classify(&["exact", "--data", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let out = classify(&["mdp-exact", "--data", "galaxy"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn csv_column_input() {
    let f = write_temp("id,y\n1,0.1\n2,0.2\n3,5.0\n");
    let out = classify(&[
        "exact",
        "--data",
        f.path().to_str().unwrap(),
        "--column",
        "y",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.starts_with("k,exact\n"));
}

#[test]
fn ward_small10_splits_four_six() {
    let out = classify(&["ward", "--data", "small10", "--k", "2", "--format", "json"]);
    let report: Report = serde_json::from_slice(&out.stdout).unwrap();
    let w = report.analyses[0].ward.as_ref().unwrap();
    assert_eq!(w.composition.as_deref(), Some(&[4, 6][..]));
    assert_eq!(w.merges.len(), 9);
}

#[test]
fn dendrogram_plot_needs_ward() {
    let out = classify(&["exact", "--data", "small10", "--plot", "dendrogram"]);
    assert_eq!(out.status.code(), Some(2));
    let out = classify(&["ward", "--data", "small10", "--plot", "dendrogram"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 10);
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.txt");
    let out = classify(&[
        "exact",
        "--data",
        "small10",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert!(std::fs::read_to_string(path).unwrap().contains("(4,6)"));
}
