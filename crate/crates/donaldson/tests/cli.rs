//! End-to-end tests of the `donaldson` binary: pipelines between
//! subcommands, exit-code contract, and structured errors on stderr.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_donaldson"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn stderr_error_kind(out: &Output) -> String {
    let v: serde_json::Value =
        serde_json::from_slice(&out.stderr).expect("stderr carries a JSON error object");
    v["error"]["kind"].as_str().expect("error.kind").to_string()
}

#[test]
fn build_then_verify_bundle_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = dir.path().join("saddle.json");
    let out = run(&[
        "build",
        "--a",
        "1/2",
        "--b",
        "x1^2 - x2^2",
        "--out",
        bundle.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "build failed: {out:?}");
    assert!(bundle.exists());

    let out = run(&["verify", bundle.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["mode"], "symbolic");
    assert_eq!(report["exact_identity"], true);
}

#[test]
fn tampered_bundle_is_rejected_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = dir.path().join("bundle.json");
    let out = run(&[
        "build",
        "--a",
        "1",
        "--b",
        "x1",
        "--out",
        bundle.to_str().unwrap(),
    ]);
    assert!(out.status.success());

    // corrupt g so the certified identity no longer holds
    let text = std::fs::read_to_string(&bundle).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["g"]["terms"][0]["num"] = serde_json::json!("999");
    std::fs::write(&bundle, serde_json::to_string(&v).unwrap()).unwrap();

    let out = run(&["verify", bundle.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stderr_error_kind(&out), "constraint_violation");
}

#[test]
fn usage_errors_exit_1_with_json_on_stderr() {
    // unknown flag
    let out = run(&["build", "--a", "1", "--b", "x1", "--nope"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_error_kind(&out), "usage");

    // malformed rational
    let out = run(&["build", "--a", "one", "--b", "x1"]);
    assert_eq!(out.status.code(), Some(1));

    // missing subcommand
    let out = run(&[]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn non_harmonic_b_exits_2() {
    let out = run(&["build", "--a", "1", "--b", "x1^2"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_error_kind(&out), "constraint_violation");
}

#[test]
fn help_and_version_exit_0() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
    assert_eq!(run(&["solve", "--help"]).status.code(), Some(0));
}

#[test]
fn transform_and_liouville_on_exact_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = dir.path().join("bundle.json");
    assert!(run(&[
        "build",
        "--a",
        "1/2",
        "--b",
        "x1^3 - 3*x1*x2^2",
        "--out",
        bundle.to_str().unwrap(),
    ])
    .status
    .success());

    let out = run(&["transform", bundle.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["harmonicity"]["harmonic"], true);

    let out = run(&["liouville", bundle.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["positive"], true);
    assert_eq!(report["verdict"], "ConsistentWithConstant");
}

#[test]
fn solve_writes_grid_then_numeric_pipeline_consumes_it() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = dir.path().join("bundle.json");
    assert!(run(&[
        "build",
        "--a",
        "1/2",
        "--b",
        "x1",
        "--out",
        bundle.to_str().unwrap(),
    ])
    .status
    .success());

    let grid = dir.path().join("solution.grid.json");
    let out = run(&[
        "solve",
        "--bundle",
        bundle.to_str().unwrap(),
        "--bounds",
        "0:3,0:1",
        "--shape",
        "17,17",
        "--out-grid",
        grid.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    assert_eq!(report["status"], "Converged");
    assert!(grid.exists());

    // grid input is sniffed by verify / transform / liouville
    let out = run(&["verify", grid.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert!(report["residual"]["max_abs"].as_f64().unwrap() < 1e-6);

    let theta = dir.path().join("theta.grid.json");
    let out = run(&[
        "transform",
        grid.to_str().unwrap(),
        "--out-theta",
        theta.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(theta.exists());

    let out = run(&["liouville", grid.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn solve_reports_numeric_failure_with_exit_3() {
    // boundary data incompatible with the ellipticity cone: concave in t
    let out = run(&[
        "solve",
        "--expr=-10*t^2",
        "--bounds",
        "0:1,0:1",
        "--shape",
        "9,9",
        "--max-iters",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(3), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stderr_error_kind(&out), "numeric_failure");
}

#[test]
fn catalog_lists_harmonics_and_reproducible_complexify() {
    let out = run(&["catalog", "--n", "2", "--max-degree", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert!(v.as_array().map(|a| !a.is_empty()).unwrap_or(false));

    // same seed => byte-identical report
    let args = [
        "complexify",
        "--a",
        "1",
        "--b",
        "w^2 + wbar^2",
        "--seed",
        "7",
    ];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(first.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&first.stderr));
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn probe31_emits_csv_header() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = dir.path().join("bundle.json");
    assert!(run(&[
        "build",
        "--a",
        "1",
        "--b",
        "x1",
        "--out",
        bundle.to_str().unwrap(),
    ])
    .status
    .success());
    let out = run(&[
        "probe31",
        "--bundle",
        bundle.to_str().unwrap(),
        "--domains",
        "1,2",
        "--points",
        "9",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    let header = text.lines().next().unwrap_or("");
    assert!(header.contains("domain"), "unexpected header: {header}");
}

#[test]
fn missing_input_file_reports_io_error() {
    let out = run(&["verify", "/nonexistent/bundle.json"]);
    assert_ne!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(v["error"]["kind"].is_string());
}

#[test]
fn reports_embed_effective_config() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = dir.path().join("bundle.json");
    assert!(run(&["build", "--a", "1", "--b", "x1", "--out", bundle.to_str().unwrap()])
        .status
        .success());
    let out = run(&["verify", bundle.to_str().unwrap(), "--samples", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["config"]["samples"], 5);
    let _ = Path::new("");
}
