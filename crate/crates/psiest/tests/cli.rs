//! End-to-end tests of the psiest binary: exit codes, output shapes, and
//! byte stability of JSON reports.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_psiest"))
}

fn write_temp(name: &str, contents: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("psiest-cli-{name}"));
    std::fs::write(&path, contents).expect("write fixture");
    path
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("utf-8 stderr")
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("exit code")
}

#[test]
fn estimates_the_mean_from_a_csv_file() {
    let data = write_temp("mean.csv", "x\n1\n3\n");
    let out = bin()
        .args(["estimate", "--psi", "normal(sigma=1)", "--data"])
        .arg(&data)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert_eq!(stdout(&out), "2\n");
}

#[test]
fn weight_column_drives_the_weighted_mean() {
    let data = write_temp("weighted.csv", "x,weight\n1,3\n3,1\n");
    let out = bin()
        .args(["estimate", "--psi", "normal(sigma=1)", "--data"])
        .arg(&data)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert_eq!(stdout(&out), "1.5\n");
}

#[test]
fn jsonl_rows_carry_optional_weights() {
    let data = write_temp("rows.jsonl", "{\"x\":1}\n\n{\"x\":3,\"weight\":2}\n");
    let out = bin()
        .args([
            "estimate",
            "--psi",
            "normal(sigma=1)",
            "--format",
            "jsonl",
            "--data",
        ])
        .arg(&data)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let value: f64 = stdout(&out).trim().parse().unwrap();
    assert!((value - 7.0 / 3.0).abs() <= 1e-9, "got {value}");
}

#[test]
fn inline_weights_must_match_the_row_count() {
    let data = write_temp("inline.csv", "x\n1\n3\n");
    let out = bin()
        .args([
            "estimate",
            "--psi",
            "normal(sigma=1)",
            "--weights",
            "3,1",
            "--data",
        ])
        .arg(&data)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert_eq!(stdout(&out), "1.5\n");

    let out = bin()
        .args([
            "estimate",
            "--psi",
            "normal(sigma=1)",
            "--weights",
            "3,1,4",
            "--data",
        ])
        .arg(&data)
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
    assert!(
        stderr(&out).contains("3 values"),
        "stderr: {}",
        stderr(&out)
    );
}

#[test]
fn estimate_json_report_is_byte_stable() {
    let data = write_temp("stable.csv", "x\n1\n3\n");
    let run = || {
        let out = bin()
            .args(["estimate", "--psi", "normal(sigma=1)", "--json", "--data"])
            .arg(&data)
            .output()
            .unwrap();
        assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
        out.stdout
    };
    let first = run();
    assert_eq!(
        first,
        run(),
        "two identical invocations must match byte for byte"
    );
    let text = String::from_utf8(first).unwrap();
    let report: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(report["status"], "zero-point");
    assert_eq!(report["theta"], "2.0000000000000000e0");
    assert_eq!(report["observations"], 2);
}

#[test]
fn out_of_domain_rows_are_listed_with_exit_two() {
    let data = write_temp("domain.csv", "x\n0.5\n1.5\n0.7\n");
    let out = bin()
        .args(["estimate", "--psi", "alpha-density", "--data"])
        .arg(&data)
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(
        err.contains("row 2") && err.contains("1.5"),
        "stderr: {err}"
    );
}

#[test]
fn csv_parse_errors_cite_the_line() {
    let data = write_temp("parse.csv", "x\n1\noops\n");
    let out = bin()
        .args(["estimate", "--psi", "normal(sigma=1)", "--data"])
        .arg(&data)
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(
        err.contains("line 3") && err.contains("oops"),
        "stderr: {err}"
    );
}

#[test]
fn tied_sign_weights_exit_with_solver_failure() {
    let data = write_temp("tie.csv", "x\n2\n7\n");
    let out = bin()
        .args(["estimate", "--psi", "sign", "--data"])
        .arg(&data)
        .output()
        .unwrap();
    assert_eq!(code(&out), 4);
    assert!(
        stderr(&out).contains("not unique"),
        "stderr: {}",
        stderr(&out)
    );
}

#[test]
fn holding_suite_exits_zero_with_a_json_report() {
    let out = bin()
        .args([
            "check",
            "bisymmetry-2x2",
            "--psi",
            "alpha-density",
            "--trials",
            "10",
            "--seed",
            "9",
            "--json",
        ])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(report["property"], "bisymmetry-2x2");
    assert_eq!(report["status"], "holds");
    assert_eq!(report["trials"], 10);
    assert_eq!(report["seed"], 9);
}

#[test]
fn violated_suite_exits_one_and_prints_a_witness() {
    let out = bin()
        .args([
            "check",
            "mean-type",
            "--psi",
            "kappa",
            "--trials",
            "400",
            "--seed",
            "1",
            "--json",
        ])
        .output()
        .unwrap();
    assert_eq!(code(&out), 1, "stderr: {}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(report["status"], "violated");
    assert_eq!(report["witness"]["kind"], "mean-type");
    assert!(report["trials"].as_u64().unwrap() <= 400);
}

#[test]
fn check_json_report_is_byte_stable() {
    let run = || {
        let out = bin()
            .args([
                "check",
                "weight-line-monotone",
                "--psi",
                "normal(sigma=1)",
                "--trials",
                "5",
                "--seed",
                "3",
                "--json",
            ])
            .output()
            .unwrap();
        assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
        out.stdout
    };
    assert_eq!(run(), run());
}

#[test]
fn seed_precedence_is_flag_then_env_then_default() {
    let with_flag = bin()
        .args([
            "check",
            "mean-type",
            "--psi",
            "sign",
            "--trials",
            "5",
            "--seed",
            "11",
            "--json",
        ])
        .output()
        .unwrap();
    let with_env = bin()
        .args([
            "check",
            "mean-type",
            "--psi",
            "sign",
            "--trials",
            "5",
            "--json",
        ])
        .env("PSIEST_SEED", "11")
        .output()
        .unwrap();
    assert_eq!(with_flag.stdout, with_env.stdout);

    let flag_beats_env = bin()
        .args([
            "check",
            "mean-type",
            "--psi",
            "sign",
            "--trials",
            "5",
            "--seed",
            "11",
            "--json",
        ])
        .env("PSIEST_SEED", "99")
        .output()
        .unwrap();
    assert_eq!(flag_beats_env.stdout, with_flag.stdout);

    let default_seed = bin()
        .args([
            "check",
            "mean-type",
            "--psi",
            "sign",
            "--trials",
            "5",
            "--json",
        ])
        .env_remove("PSIEST_SEED")
        .output()
        .unwrap();
    let report: serde_json::Value = serde_json::from_str(stdout(&default_seed).trim()).unwrap();
    assert_eq!(report["seed"], 42);
}

#[test]
fn sensitivity_reports_the_minimal_witness() {
    let out = bin()
        .args([
            "sensitivity",
            "--psi",
            "normal(sigma=1)",
            "--x",
            "0",
            "--y",
            "1",
            "--u",
            "0.3",
            "--v",
            "0.4",
            "--json",
        ])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(report["outcome"], "found");
    assert_eq!(report["k"], 2);
    assert_eq!(report["m"], 1);
}

#[test]
fn sensitivity_reports_when_no_counts_work() {
    let out = bin()
        .args([
            "sensitivity",
            "--psi",
            "max",
            "--x",
            "0",
            "--y",
            "1",
            "--u",
            "0.3",
            "--v",
            "0.4",
            "--max-total",
            "64",
        ])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("not found up to total count 64"));
}

#[test]
fn malformed_sensitivity_window_is_a_usage_error() {
    let out = bin()
        .args([
            "sensitivity",
            "--psi",
            "normal(sigma=1)",
            "--x",
            "0",
            "--y",
            "1",
            "--u",
            "0.4",
            "--v",
            "0.3",
        ])
        .output()
        .unwrap();
    assert_eq!(code(&out), 2, "stdout: {}", stdout(&out));
}

#[test]
fn every_demo_replays_cleanly() {
    let expectations = [
        ("kappa-mean-type", "mean-type VIOLATED"),
        ("kappa-bisymmetry", "bisymmetry VIOLATED"),
        ("sign-table", "no unique estimate"),
        ("replication", "collapses to the base value 0"),
        ("sensitivity-normal", "found: k = 2, m = 1"),
        ("sensitivity-max", "not found up to total count 512"),
    ];
    for (id, needle) in expectations {
        let out = bin().args(["demo", id]).output().unwrap();
        assert_eq!(code(&out), 0, "demo {id} stderr: {}", stderr(&out));
        assert!(
            stdout(&out).contains(needle),
            "demo {id} output missing `{needle}`:\n{}",
            stdout(&out)
        );
    }
}

#[test]
fn usage_errors_exit_two() {
    // Unknown property name.
    let out = bin()
        .args(["check", "no-such", "--psi", "sign"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("unknown property"));

    // Malformed estimator descriptor.
    let out = bin()
        .args(["check", "mean-type", "--psi", "normal(rho=1)"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);

    // Missing required argument (clap's own usage handling).
    let out = bin().args(["estimate", "--psi", "sign"]).output().unwrap();
    assert_eq!(code(&out), 2);

    // A psi-only suite cannot run on a tuple-only reference.
    let out = bin()
        .args(["check", "replication-limit", "--psi", "kappa"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);

    // The sensitivity property is its own subcommand.
    let out = bin()
        .args(["check", "sensitivity", "--psi", "sign"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("subcommand"));
}

#[test]
fn expression_psi_specs_work_end_to_end() {
    let data = write_temp("expr.csv", "x\n1\n2\n3\n");
    let out = bin()
        .args([
            "estimate",
            "--psi",
            "expr(psi=\"(x - t)/4\", theta=(-inf, inf), x-domain=(-inf, inf))",
            "--data",
        ])
        .arg(&data)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let value: f64 = stdout(&out).trim().parse().unwrap();
    assert!((value - 2.0).abs() <= 1e-9, "got {value}");

    let quasi = bin()
        .args(["estimate", "--psi", "quasi-arith(f=\"sqrt(x)\")", "--data"])
        .arg(write_temp("quasi.csv", "x\n1\n81\n"))
        .output()
        .unwrap();
    assert_eq!(code(&quasi), 0, "stderr: {}", stderr(&quasi));
    let value: f64 = stdout(&quasi).trim().parse().unwrap();
    assert!((value - 25.0).abs() <= 1e-9, "got {value}");
}
