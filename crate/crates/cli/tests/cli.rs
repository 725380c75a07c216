// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_posit-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn table1_writes_seven_rows_and_sidecar() {
    let d = tempfile::tempdir().unwrap();
    let out = run(&["table1", "--out", d.path().to_str().unwrap()]);
    assert!(out.status.success());
    let csv = read(d.path(), "table1.csv");
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 8);
    assert_eq!(lines[0], "format,useed_log2,minpos_log2,max_fraction_bits");
    assert_eq!(lines[4], "\"posit(64,15)\",32768,-2031616,46");
    assert_eq!(lines[6], "\"posit(64,21)\",2097152,-130023424,40");
    assert_eq!(lines[7], "\"binary64\",,-1074,52");
    let meta = read(d.path(), "table1.meta");
    assert!(meta.contains("subcommand=table1\n"));
    assert!(meta.contains("file=table1.csv\n"));
}

#[test]
fn cycles_forward_log() {
    let d = tempfile::tempdir().unwrap();
    let dir = d.path().to_str().unwrap();
    let out = run(&[
        "cycles", "--app", "forward", "--h", "64", "--t", "500000", "--system", "log", "--out", dir,
    ]);
    assert!(out.status.success());
    assert_eq!(
        read(d.path(), "cycles.csv"),
        "app,system,outer_bound,pipeline_latency,pe_latency,total_cycles\nforward,log,500000,64,116,90000000\n"
    );
    let out = run(&[
        "cycles", "--app", "column", "--k", "13", "--n", "309189", "--out", dir,
    ]);
    assert!(out.status.success());
    let csv = read(d.path(), "cycles.csv");
    assert!(csv.contains("column,log,309189,13,73,26590254\n"));
    assert!(csv.contains("column,posit,309189,13,30,13295127\n"));
}

#[test]
fn ops_accuracy_is_deterministic_across_worker_counts() {
    let d = tempfile::tempdir().unwrap();
    let args = |sub: &str, workers: &str| {
        let dir = d.path().join(sub);
        let o = run(&[
            "ops-accuracy",
            "--seed",
            "7",
            "--adds",
            "150",
            "--muls",
            "80",
            "--exp-lo",
            "-3000",
            "--workers",
            workers,
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        dir
    };
    let (a, b) = (args("a", "1"), args("b", "3"));
    for f in ["records.csv", "summary.csv", "records.meta", "summary.meta"] {
        assert_eq!(read(&a, f), read(&b, f), "{f}");
    }
    let records = read(&a, "records.csv");
    // header plus five systems times 230 operations
    assert_eq!(records.lines().count(), 1 + 5 * 230);
    assert!(read(&a, "summary.meta").contains("seed=7\n"));
}

#[test]
fn trace_and_app_accuracy_write_their_tables() {
    let d = tempfile::tempdir().unwrap();
    let dir = d.path().to_str().unwrap();
    assert!(run(&["trace", "--h", "1", "--t", "50", "--out", dir])
        .status
        .success());
    let trace = read(d.path(), "trace.csv");
    assert_eq!(trace.lines().count(), 51);
    assert!(read(d.path(), "trace.meta").contains("reference=-1074\n"));

    let o = run(&[
        "app-accuracy",
        "--app",
        "pbd",
        "--count",
        "3",
        "--lo",
        "-3000",
        "--hi",
        "-1200",
        "--max-n",
        "400",
        "--systems",
        "binary64,posit64e12",
        "--out",
        dir,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let cdf = read(d.path(), "cdf.csv");
    assert_eq!(cdf.lines().count(), 1 + 2 * 3);
    // every instance is below binary64's range
    let records = read(d.path(), "records.csv");
    assert_eq!(
        records
            .lines()
            .filter(|l| l.starts_with("binary64,") && l.ends_with(",1"))
            .count(),
        3
    );
    assert!(read(d.path(), "cdf.meta").contains("instance.2=pbd "));
}

#[test]
fn usage_errors_exit_with_one() {
    let d = tempfile::tempdir().unwrap();
    let dir = d.path().to_str().unwrap();
    for args in [
        vec!["--systems", "binary64,posit64e99", "table1", "--out", dir],
        vec!["--systems", "float32", "table1", "--out", dir],
        vec!["frobnicate"],
        vec!["--prec", "12", "table1", "--out", dir],
        vec![
            "cycles", "--app", "forward", "--h", "48", "--t", "10", "--out", dir,
        ],
        vec![
            "ops-accuracy",
            "--buckets",
            "0,-10",
            "--adds",
            "5",
            "--muls",
            "0",
            "--out",
            dir,
        ],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
    assert!(!d.path().join("table1.csv").exists());
}

#[test]
fn help_exits_cleanly() {
    let o = run(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    for sub in [
        "ops-accuracy",
        "app-accuracy",
        "trace",
        "cycles",
        "table1",
        "selftest",
    ] {
        assert!(text.contains(sub), "{sub}");
    }
}

#[test]
fn selftest_reports_each_check() {
    let o = run(&["selftest"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 6);
}
