use std::path::Path;
use std::process::{Command, Output};

use tempfile::tempdir;

fn multitrace(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_multitrace"))
        .args(args)
        .current_dir(cwd)
        .env_remove("MULTITRACE_OUT_DIR")
        .env_remove("MULTITRACE_CONFIG")
        .output()
        .expect("binary runs")
}

fn report_body(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(str::to_owned)
        .collect()
}

#[test]
fn perm_prints_permutation() {
    let dir = tempdir().unwrap();
    let out = multitrace(&["perm", "--n", "6"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("{2→2, 3→5, 4→3, 5→4}"), "{text}");
    assert!(!multitrace(&["perm", "--n", "2"], dir.path())
        .status
        .success());
}

#[test]
fn explain_known_and_unknown() {
    let dir = tempdir().unwrap();
    let out = multitrace(
        &["explain", "--check", "rhs_resolvent", "--n", "4"],
        dir.path(),
    );
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("(identity)"));
    let out = multitrace(&["explain", "--check", "no_such_check"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .contains("unknown check"));
}

#[test]
fn single_check_writes_report() {
    let dir = tempdir().unwrap();
    let out = multitrace(
        &[
            "verify",
            "--checks",
            "beta_normalization",
            "--trials",
            "1",
            "--out",
            "r.jsonl",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("r.jsonl")).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().next().unwrap().contains("\"version\""));
}

#[test]
fn identical_configs_give_identical_reports() {
    let dir = tempdir().unwrap();
    let args = |out: &'static str| {
        vec![
            "verify",
            "--suite",
            "identities",
            "--n",
            "3..6",
            "--d",
            "2",
            "--trials",
            "3",
            "--seed",
            "5",
            "--out",
            out,
        ]
    };
    assert!(multitrace(&args("a.jsonl"), dir.path()).status.success());
    let mut b = args("b.jsonl");
    b.extend(["--threads", "1"]);
    assert!(multitrace(&b, dir.path()).status.success());
    let a = report_body(&dir.path().join("a.jsonl"));
    let b = report_body(&dir.path().join("b.jsonl"));
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn failing_check_sets_exit_code() {
    let dir = tempdir().unwrap();
    let out = multitrace(
        &[
            "verify",
            "--checks",
            "projection_limit",
            "--d",
            "3",
            "--trials",
            "2",
            "--out",
            "s.jsonl",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn csv_format_and_env_output_dir() {
    let dir = tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_multitrace"))
        .args([
            "verify",
            "--checks",
            "golden_thompson,lieb3",
            "--trials",
            "4",
            "--format",
            "csv",
        ])
        .current_dir(dir.path())
        .env("MULTITRACE_OUT_DIR", dir.path().join("reports"))
        .env_remove("MULTITRACE_CONFIG")
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let mut rdr = csv::Reader::from_path(dir.path().join("reports/report.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(&rows[0][0], "golden_thompson");
    assert_eq!(&rows[0][2], "4");
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.toml"),
        "checks = [\"complex_powers\"]\nn_values = [3, 4]\ntrials = 5\n[quad.real_line]\nnodes = 300\n",
    )
    .unwrap();
    let out = multitrace(
        &[
            "verify", "--config", "c.toml", "--trials", "2", "--out", "c.jsonl",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let body = report_body(&dir.path().join("c.jsonl"));
    assert_eq!(body.len(), 4);
    let header = std::fs::read_to_string(dir.path().join("c.jsonl")).unwrap();
    assert!(header.lines().next().unwrap().contains("\"nodes\":300"));

    std::fs::write(dir.path().join("bad.toml"), "trials = 0\n").unwrap();
    let out = multitrace(&["verify", "--config", "bad.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}
