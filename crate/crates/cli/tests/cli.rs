//! Command-line behavior: exit codes, output files, and logging.

use std::path::Path;
use std::process::{Command, Output};

fn affectfuse(args: &[&str], tail: &[&Path]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_affectfuse"));
    cmd.args(args);
    for path in tail {
        cmd.arg(path);
    }
    cmd.output().unwrap()
}

#[test]
fn synth_then_evaluate_succeeds_and_writes_all_reports() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let out = dir.path().join("out");

    let synth = affectfuse(
        &[
            "synth",
            "--days",
            "3",
            "--seed",
            "8",
            "--separation",
            "1.5",
            "--out",
        ],
        &[&data],
    );
    assert!(synth.status.success());
    assert!(data.join("manifest.json").is_file());
    assert!(data.join("day01.csv").is_file());
    assert!(data.join("day03.csv").is_file());

    let eval = affectfuse(
        &["evaluate", "--parallel", "--manifest"],
        &[&data.join("manifest.json"), Path::new("--out"), &out],
    );
    assert!(
        eval.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&eval.stderr)
    );
    for name in [
        "report.json",
        "confusion.csv",
        "rates.csv",
        "mscr.csv",
        "roc_points.csv",
    ] {
        assert!(out.join(name).is_file(), "{name} missing");
    }
    let stdout = String::from_utf8(eval.stdout).unwrap();
    assert!(stdout.contains("accuracy"), "stdout: {stdout}");

    let rates = std::fs::read_to_string(out.join("rates.csv")).unwrap();
    assert!(rates.starts_with("emotion,tpr,fpr\n"));
    assert_eq!(rates.lines().count(), 9);
}

#[test]
fn unknown_flags_exit_with_usage_code_two() {
    let out = affectfuse(&["evaluate", "--no-such-flag"], &[]);
    assert_eq!(out.status.code(), Some(2));
    let missing_subcommand = affectfuse(&["frobnicate"], &[]);
    assert_eq!(missing_subcommand.status.code(), Some(2));
}

#[test]
fn a_missing_manifest_exits_one_with_a_diagnostic() {
    let out = affectfuse(&["evaluate", "--manifest", "does/not/exist.json"], &[]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("error:"), "stderr: {stderr}");
    assert!(stderr.contains("does/not/exist.json"), "stderr: {stderr}");
}

#[test]
fn features_emits_the_labeled_table_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    assert!(
        affectfuse(&["synth", "--days", "2", "--seed", "4", "--out"], &[&data])
            .status
            .success()
    );

    let out = affectfuse(&["features", "--manifest"], &[&data.join("manifest.json")]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let mut lines = stdout.lines();
    assert_eq!(
        lines.next().unwrap().split(',').take(4).collect::<Vec<_>>(),
        ["session", "emotion", "f00", "f01"]
    );
    assert_eq!(lines.count(), 16, "2 sessions x 8 emotions");
}

#[test]
fn dump_model_writes_a_mask_and_three_models() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    assert!(
        affectfuse(&["synth", "--days", "2", "--seed", "4", "--out"], &[&data])
            .status
            .success()
    );

    let out = affectfuse(
        &["dump-model", "--prune", "--manifest"],
        &[&data.join("manifest.json")],
    );
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(value["mask"]["kept"].is_array());
    assert_eq!(value["models"].as_array().unwrap().len(), 3);
    for model in value["models"].as_array().unwrap() {
        assert_eq!(model["class_means"].as_array().unwrap().len(), 8);
    }
}

#[test]
fn nyquist_clamping_is_reported_on_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    assert!(
        affectfuse(&["synth", "--days", "2", "--seed", "4", "--out"], &[&data])
            .status
            .success()
    );

    // At 20 Hz sampling the default 19 Hz cutoffs sit above Nyquist and the
    // default warn level must say so.
    let out = affectfuse(&["features", "--manifest"], &[&data.join("manifest.json")]);
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("Nyquist"), "stderr: {stderr}");
    assert!(stderr.contains("9.5 Hz"), "stderr: {stderr}");

    // Raising the threshold to error silences the warning.
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_affectfuse"));
    cmd.env("AFFECTFUSE_LOG", "error");
    cmd.args(["features", "--manifest"])
        .arg(data.join("manifest.json"));
    let quiet = cmd.output().unwrap();
    assert!(quiet.status.success());
    assert!(String::from_utf8(quiet.stderr).unwrap().is_empty());
}
