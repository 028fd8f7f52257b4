//! End-to-end tests of the `sman` binary: exit codes, report schema,
//! determinism, and the trim | construct | certify pipeline.

use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_sman");

const DEMO_6_4: &str = "sman 4 6\n\
                        1 1 1 0 0 0\n\
                        1 0 0 1 1 0\n\
                        0 1 0 1 0 1\n\
                        0 0 1 0 1 1\n";

const DENSE_6_4: &str = "sman 4 6\n\
                         1 1 1 1 1 1\n\
                         1 1 1 1 1 1\n\
                         1 1 1 1 1 1\n\
                         1 1 1 1 1 1\n";

fn write_temp(content: &str) -> tempfile::NamedTempFile {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    file.write_all(content.as_bytes()).unwrap();
    file
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn stdout_str(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

fn stderr_str(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).unwrap()
}

fn json_report(output: &Output) -> Value {
    serde_json::from_str(&stdout_str(output)).unwrap()
}

/// The report with the only nondeterministic field removed.
fn stable_report(output: &Output) -> Value {
    let mut report = json_report(output);
    report.as_object_mut().unwrap().remove("wall_time_ms");
    report
}

#[test]
fn verify_demo_network_report() {
    let file = write_temp(DEMO_6_4);
    let out = run(&["verify", file.path().to_str().unwrap(), "--json"]);
    assert!(out.status.success());
    let report = json_report(&out);

    assert_eq!(report["command"], "verify --method both");
    assert_eq!(report["result"]["mds"], true);
    assert_eq!(report["result"]["weak_security"], false);
    assert_eq!(report["result"]["row_form"], false);
    assert_eq!(report["result"]["agreement"], true);
    assert_eq!(report["witness"]["weak_security"]["kind"], "relays");
    assert_eq!(
        report["witness"]["weak_security"]["indices"],
        serde_json::json!([1, 2, 4])
    );
    assert_eq!(
        report["witness"]["row_form"]["indices"],
        serde_json::json!([1])
    );
    assert_eq!(report["profile"], serde_json::json!([1, 1, 0]));
    assert_eq!(report["input_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn verify_methods_agree_and_dump_networks() {
    let file = write_temp(DEMO_6_4);
    let path = file.path().to_str().unwrap();
    for method in ["brute", "flow", "both"] {
        let out = run(&["verify", path, "--method", method]);
        assert!(out.status.success(), "method {method}");
        assert!(stdout_str(&out).contains("weak-security-condition: fails"));
    }
    let out = run(&["verify", path, "--method", "flow", "--dump-networks"]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    assert!(text.contains("network excluded-source 1:"));
    assert!(text.contains("s p1 1"));
}

#[test]
fn verify_empty_file_is_an_input_error() {
    let file = write_temp("");
    let out = run(&["verify", file.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_str(&out).contains("line 1"));
}

#[test]
fn verify_accepts_json_input() {
    let file = write_temp(
        r#"{"k":4,"n":6,"rows":[[1,1,1,0,0,0],[1,0,0,1,1,0],[0,1,0,1,0,1],[0,0,1,0,1,1]]}"#,
    );
    let out = run(&["verify", file.path().to_str().unwrap(), "--json"]);
    assert!(out.status.success());
    assert_eq!(json_report(&out)["result"]["mds"], true);
}

#[test]
fn trim_reports_infeasible_input() {
    let file = write_temp(DEMO_6_4);
    let out = run(&["trim", file.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr_str(&out).contains("witness sources {1}"));
}

#[test]
fn trim_emits_matrix_and_removal_log() {
    let file = write_temp(DENSE_6_4);
    let out = run(&["trim", file.path().to_str().unwrap()]);
    assert!(out.status.success());

    let matrix = stdout_str(&out);
    assert!(matrix.starts_with("sman 4 6\n"));
    for line in matrix.lines().skip(1) {
        let degree = line.split_whitespace().filter(|&t| t == "1").count();
        assert_eq!(degree, 4);
    }

    let log = stderr_str(&out);
    assert_eq!(log.lines().count(), 8);
    assert!(log.lines().all(|l| l.starts_with("removed ")));

    // Audit mode (brute-force re-verification) gives the same trimming.
    let audit = run(&["trim", file.path().to_str().unwrap(), "--audit"]);
    assert!(audit.status.success());
    assert_eq!(stdout_str(&audit), matrix);
}

#[test]
fn construct_is_deterministic_and_verifiable() {
    let dense = write_temp(DENSE_6_4);
    let trimmed = run(&["trim", dense.path().to_str().unwrap()]);
    let trimmed_file = write_temp(&stdout_str(&trimmed));
    let path = trimmed_file.path().to_str().unwrap();

    let a = run(&["construct", path, "--prime", "13", "--seed", "5"]);
    let b = run(&["construct", path, "--prime", "13", "--seed", "5"]);
    assert!(a.status.success());
    assert_eq!(stdout_str(&a), stdout_str(&b), "same seed, same code");
    assert!(stdout_str(&a).starts_with("code 4 6 13\n"));

    let ja = run(&["construct", path, "--prime", "13", "--seed", "5", "--json"]);
    let jb = run(&["construct", path, "--prime", "13", "--seed", "5", "--json"]);
    assert_eq!(stable_report(&ja), stable_report(&jb));
    assert_eq!(json_report(&ja)["result"]["attempts"], 5);

    // The emitted file certifies cleanly, including the entropy oracle.
    let code_file = write_temp(&stdout_str(&a));
    let cert = run(&["certify", code_file.path().to_str().unwrap(), "--json"]);
    assert!(cert.status.success());
    let report = json_report(&cert);
    assert_eq!(report["result"]["mds"], true);
    assert_eq!(report["result"]["weak_security"], true);
    assert_eq!(report["result"]["oracle_ran"], true);
    assert_eq!(report["result"]["weak_security_exact"], true);
    assert_eq!(report["profile"].as_array().unwrap().len(), 3);
}

#[test]
fn construct_failure_exit_codes() {
    let demo = write_temp(DEMO_6_4);
    let out = run(&["construct", demo.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "infeasible topology");
    assert!(stderr_str(&out).contains("witness relays {1,2,4}"));

    let dense = write_temp(DENSE_6_4);
    let trimmed = run(&["trim", dense.path().to_str().unwrap()]);
    let trimmed_file = write_temp(&stdout_str(&trimmed));
    let path = trimmed_file.path().to_str().unwrap();

    let not_prime = run(&["construct", path, "--prime", "6"]);
    assert_eq!(not_prime.status.code(), Some(2));

    // GF(2) forces every supported entry to 1; the sampled matrix never
    // changes and never verifies, so the retry budget runs out.
    let exhausted = run(&["construct", path, "--prime", "2", "--attempts", "4"]);
    assert_eq!(exhausted.status.code(), Some(4));
    assert!(stderr_str(&exhausted).contains("4 attempts"));
}

#[test]
fn certify_skips_oracle_over_budget() {
    let dense = write_temp(DENSE_6_4);
    let trimmed = run(&["trim", dense.path().to_str().unwrap()]);
    let trimmed_file = write_temp(&stdout_str(&trimmed));
    let built = run(&[
        "construct",
        trimmed_file.path().to_str().unwrap(),
        "--prime",
        "65537",
    ]);
    assert!(built.status.success());
    let code_file = write_temp(&stdout_str(&built));

    let cert = run(&["certify", code_file.path().to_str().unwrap(), "--json"]);
    assert!(cert.status.success());
    let report = json_report(&cert);
    assert_eq!(report["result"]["oracle_ran"], false);
    assert_eq!(report["result"]["weak_security"], true);
    assert_eq!(report["result"]["weak_security_exact"], Value::Null);
}

#[test]
fn simulate_recovers_all_single_errors() {
    let dense = write_temp(DENSE_6_4);
    let trimmed = run(&["trim", dense.path().to_str().unwrap()]);
    let trimmed_file = write_temp(&stdout_str(&trimmed));
    let built = run(&[
        "construct",
        trimmed_file.path().to_str().unwrap(),
        "--prime",
        "13",
        "--seed",
        "5",
    ]);
    let code_file = write_temp(&stdout_str(&built));
    let path = code_file.path().to_str().unwrap();

    let out = run(&["simulate", path, "--errors", "1", "--trials", "200", "--seed", "3", "--json"]);
    assert!(out.status.success());
    let report = json_report(&out);
    assert_eq!(report["result"]["recovered"], 200);
    assert_eq!(report["result"]["trials"], 200);
    assert_eq!(report["result"]["success_rate"], 1.0);
    assert_eq!(report["result"]["guaranteed"], true);

    // Same seed reproduces the report byte for byte (modulo wall time).
    let again = run(&["simulate", path, "--errors", "1", "--trials", "200", "--seed", "3", "--json"]);
    assert_eq!(stable_report(&out), stable_report(&again));

    // Beyond the half-distance bound there is no guarantee claim.
    let two = run(&["simulate", path, "--errors", "2", "--trials", "50", "--json"]);
    assert!(two.status.success());
    assert_eq!(json_report(&two)["result"]["guaranteed"], false);
}

#[test]
fn pipeline_works_through_pipes() {
    let dense = write_temp(DENSE_6_4);
    let script = format!(
        "{BIN} trim {path} 2>/dev/null | {BIN} construct - --prime 13 --seed 5 2>/dev/null | {BIN} certify -",
        path = dense.path().to_str().unwrap()
    );
    let out = Command::new("sh").arg("-c").arg(&script).output().unwrap();
    assert!(out.status.success());
    let text = stdout_str(&out);
    assert!(text.contains("mds-code: verified"));
    assert!(text.contains("weak-security-code: verified"));
    assert!(text.contains("entropy-oracle: confirmed"));
}
