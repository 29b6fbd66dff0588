//! End-to-end tests of the `ret` binary: subcommand output, ingestion
//! validation, exit codes, and report determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ret() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ret"))
}

fn run(args: &[&str]) -> Output {
    ret().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .display()
        .to_string()
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ret-cli-test-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn test_subcommand_reproduces_the_binary_example() {
    let out = run(&[
        "test",
        "--family",
        "binary",
        "--delta",
        "0.8",
        "--input",
        &data("depression.csv"),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("T = 2.1033"), "{text}");
    assert!(text.contains("reject the null"), "{text}");

    let out = run(&[
        "test",
        "--family",
        "poisson",
        "--delta",
        "0.5",
        "--input",
        &data("epilepsy.csv"),
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("T = 1.3281"), "{text}");
    assert!(text.contains("cannot reject"), "{text}");
}

#[test]
fn json_reports_are_byte_identical_across_runs() {
    let args = [
        "test",
        "--family",
        "binary",
        "--delta",
        "0.8",
        "--input",
        &data("depression.csv"),
        "--format",
        "json",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.contains("\"schema\": 1"), "{text}");
}

#[test]
fn csv_format_flattens_the_report() {
    let out = run(&[
        "plan",
        "--family",
        "binary",
        "--delta",
        "0.7",
        "--alt",
        "0.3,0.3,0.1",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("key,value\n"), "{text}");
    assert!(text.contains("plan.n_required,1308"), "{text}");
}

#[test]
fn plan_matches_the_comparison_row() {
    let out = run(&[
        "plan",
        "--family",
        "binary",
        "--delta",
        "0.6",
        "--alpha",
        "0.025",
        "--power",
        "0.8",
        "--alt",
        "0.5,0.5,0.1",
        "--weights",
        "1:1:1",
        "--format",
        "json",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["plan"]["n_required"], 319);
    assert_eq!(v["plan"]["n_per_group"][0], 106);
}

#[test]
fn rule_of_thumb_weights_token() {
    let out = run(&[
        "plan",
        "--family",
        "normal",
        "--tau2",
        "1.0",
        "--delta",
        "0.6",
        "--alt",
        "1.0,1.0,0.0",
        "--weights",
        "1:D:1-D",
        "--format",
        "json",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let wr = v["plan"]["weights"]["wr"].as_f64().unwrap();
    assert!((wr - 0.3).abs() < 1e-12);
}

#[test]
fn alloc_reports_the_improved_ratio() {
    let out = run(&[
        "alloc",
        "--family",
        "binary",
        "--delta",
        "0.6",
        "--alt",
        "0.9,0.9,0.1",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("2.500 : 1.500 : 1"), "{text}");
}

#[test]
fn power_exact_small_grid() {
    let out = run(&[
        "power",
        "--family",
        "binary",
        "--delta",
        "0.6",
        "--alpha",
        "0.025",
        "--gen",
        "0.5,0.5,0.1",
        "--n",
        "35,35,18",
        "--format",
        "json",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let p = v["estimate"]["power"].as_f64().unwrap();
    assert!(p > 0.2 && p < 0.6, "power {p}");
    assert_eq!(v["estimate"]["standard_error"], 0.0);
}

#[test]
fn exit_code_2_for_validation_errors() {
    // Duplicate group row.
    let dir = temp_dir("dup");
    let bad = dir.join("dup.csv");
    std::fs::write(&bad, "group,n,stat\nT,10,5\nT,10,6\nR,10,5\nP,10,5\n").unwrap();
    let out = run(&[
        "test",
        "--family",
        "binary",
        "--delta",
        "0.8",
        "--input",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stderr(&out).contains("duplicate"), "{}", stderr(&out));

    // Missing group.
    let bad = dir.join("missing.csv");
    std::fs::write(&bad, "group,n,stat\nT,10,5\nR,10,5\n").unwrap();
    let out = run(&[
        "test",
        "--family",
        "binary",
        "--delta",
        "0.8",
        "--input",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("missing group P"), "{}", stderr(&out));

    // Parse error carries the line number.
    let bad = dir.join("parse.csv");
    std::fs::write(&bad, "group,n,stat\nT,10,5\nR,ten,5\nP,10,5\n").unwrap();
    let out = run(&[
        "test",
        "--family",
        "binary",
        "--delta",
        "0.8",
        "--input",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));

    // Degenerate margin in planning.
    let out = run(&[
        "plan",
        "--family",
        "binary",
        "--delta",
        "1.0",
        "--alt",
        "0.6,0.5,0.1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("degenerate allocation"));
}

#[test]
fn exit_code_3_for_numerical_failures() {
    // An all-success test group puts the MLE on the boundary.
    let dir = temp_dir("degen");
    let bad = dir.join("degen.csv");
    std::fs::write(&bad, "group,n,stat\nT,10,10\nR,10,5\nP,10,2\n").unwrap();
    let out = run(&[
        "test",
        "--family",
        "binary",
        "--delta",
        "0.8",
        "--input",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("degenerate data"), "{}", stderr(&out));
}

#[test]
fn exit_code_4_for_budget_exceeded() {
    let out = run(&[
        "power",
        "--family",
        "binary",
        "--delta",
        "0.6",
        "--gen",
        "0.5,0.5,0.1",
        "--n",
        "200,200,100",
        "--budget",
        "1000",
    ]);
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
    assert!(stderr(&out).contains("budget exceeded"));
}

#[test]
fn raw_observations_for_the_normal_family() {
    let dir = temp_dir("raw");
    let file = dir.join("raw.csv");
    let mut text = String::from("group,value\n");
    for (g, shift) in [("T", 2.0), ("R", 1.6), ("P", 0.2)] {
        for v in [-0.9, -0.2, 0.4, 1.1] {
            text.push_str(&format!("{g},{}\n", shift + v));
        }
    }
    std::fs::write(&file, &text).unwrap();
    let out = run(&[
        "test",
        "--family",
        "normal",
        "--delta",
        "0.5",
        "--input",
        file.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let mle = v["report"]["mle_unrestricted"][0].as_f64().unwrap();
    assert!((mle - 2.1).abs() < 1e-9, "test-group mean {mle}");
}

#[test]
fn reproduce_t4_writes_table_and_diff() {
    let dir = temp_dir("t4");
    let out = run(&[
        "reproduce",
        "t4",
        "--out",
        dir.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["status"], "ok");
    assert_eq!(v["mismatch"], 0);
    assert_eq!(v["published_inconsistent"], 1);
    let table = std::fs::read_to_string(dir.join("t4.csv")).unwrap();
    assert_eq!(table.lines().count(), 13); // header + 12 rows
    let diff = std::fs::read_to_string(dir.join("t4_diff.csv")).unwrap();
    assert!(diff.contains("published_inconsistent"));
}

#[test]
fn reproduce_figure_series() {
    let dir = temp_dir("f3");
    let out = run(&["reproduce", "f3", "--out", dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let series = std::fs::read_to_string(dir.join("f3.csv")).unwrap();
    assert!(series.starts_with("delta,rate_ratio,"));
    assert!(series.lines().count() > 300);
}
