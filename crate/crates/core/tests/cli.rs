use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn chainrec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chainrec"))
        .args(args)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const DOUBLING: &str = "depth = 4\nanalyses = [\"components\", \"basins\"]\n[system]\ntype = \"builtin\"\nname = \"doubling\"\n";

#[test]
fn analyze_writes_all_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), DOUBLING);
    let out_dir = tmp.path().join("out");
    let out = chainrec(&["analyze", &cfg, "--output-dir", out_dir.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for f in ["report.json", "condensation.dot", "boxes.csv"] {
        assert!(out_dir.join(f).is_file(), "{f}");
    }
    assert_eq!(
        fs::read_to_string(out_dir.join("boxes.csv"))
            .unwrap()
            .lines()
            .count(),
        17
    );
}

#[test]
fn unknown_key_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &format!("deltaa = 0.1\n{DOUBLING}"));
    let out = chainrec(&["analyze", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("deltaa"));
}

#[test]
fn syntax_error_reports_position() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "depth = = 4\n");
    let out = chainrec(&["analyze", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn decreasing_depths_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "depths = [6, 5]\nanalyses = [\"coverage_study\"]\n[system]\ntype = \"builtin\"\nname = \"tent\"\n",
    );
    let out = chainrec(&["analyze", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("depths must be increasing"));
}

#[test]
fn unwritable_output_is_a_run_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), DOUBLING);
    let blocker = tmp.path().join("blocker");
    fs::write(&blocker, "").unwrap();
    let out = chainrec(&[
        "analyze",
        &cfg,
        "--output-dir",
        blocker.join("sub").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_finite_prints_green_summary() {
    let out = chainrec(&["verify-finite", "--n", "4", "--random", "50", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["all_green"], true);
    assert_eq!(v["random_count"], 50);
}

#[test]
fn verify_finite_out_of_range_n() {
    let out = chainrec(&["verify-finite", "--n", "9"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn shadow_reports_witness() {
    let out = chainrec(&[
        "shadow",
        "--system",
        "doubling",
        "--delta",
        "0.001",
        "--epsilon",
        "0.1",
        "--length",
        "10",
        "--seed",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["found"], true);
    assert!(v["deviation"].as_f64().unwrap() <= 0.1);
    assert!(v["inverse_branch_deviation"].as_f64().unwrap() <= 0.002);
}

#[test]
fn shadow_unknown_system() {
    let out = chainrec(&[
        "shadow",
        "--system",
        "henon",
        "--delta",
        "0.01",
        "--epsilon",
        "0.1",
        "--length",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(2));
}
