//! End-to-end runs of the binary: JSON shapes, exit codes, determinism.

use std::process::{Command, Output};

const SEXTIC: &str = "x^6+3*x^5+6*x^4+3*x^3+9*x+9";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maclane"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn analyze_two_adic_fixture() {
    let out = run(&["analyze", "--p", "2", "--minpoly", SEXTIC]);
    assert!(out.status.success());
    let doc = json_of(&out);
    assert_eq!(doc["prime"], 2);
    assert_eq!(doc["e"], 3);
    assert_eq!(doc["f_res"], 2);
    assert_eq!(doc["separate"], true);
    assert_eq!(doc["truncated"], false);
    assert_eq!(doc["degrees"][0]["d"], 1);
    assert_eq!(doc["degrees"][0]["kind"], "SeparateResidual");
    assert_eq!(doc["degrees"][1]["d"], 2);
    assert_eq!(doc["degrees"][1]["kind"], "SeparateValuational");
    assert_eq!(doc["degrees"][1]["phi"], "x^2+x+1");
    assert_eq!(doc["degrees"][1]["gamma_num"], "1");
    assert_eq!(doc["degrees"][1]["gamma_den"], "3");
}

#[test]
fn analyze_five_adic_branch_with_depth() {
    let out = run(&[
        "analyze",
        "--p",
        "5",
        "--minpoly",
        SEXTIC,
        "--branch",
        "0",
        "--immediate-depth",
        "5",
    ]);
    assert!(out.status.success());
    let doc = json_of(&out);
    assert_eq!(doc["truncated"], true);
    assert_eq!(doc["separate"], false);
    assert_eq!(doc["degrees"][1]["kind"], "Immediate");
    assert_eq!(doc["e"], 1);
    assert_eq!(doc["f_res"], 2);
}

#[test]
fn value_commands_match_fixture_values() {
    let out = run(&[
        "value", "--p", "2", "--minpoly", SEXTIC, "--expr", "x^2+x+1",
    ]);
    assert!(out.status.success());
    let doc = json_of(&out);
    assert_eq!(doc["value"]["num"], "1");
    assert_eq!(doc["value"]["den"], "3");

    let out = run(&["value", "--p", "3", "--minpoly", SEXTIC, "--expr", "x"]);
    let doc = json_of(&out);
    assert_eq!(doc["value"]["num"], "1");
    assert_eq!(doc["value"]["den"], "3");

    // the minimal polynomial itself has value infinity
    let out = run(&["value", "--p", "3", "--minpoly", SEXTIC, "--expr", SEXTIC]);
    let doc = json_of(&out);
    assert_eq!(doc["value"], "inf");
}

#[test]
fn digits_command_reports_partial_sums() {
    let out = run(&[
        "digits", "--p", "5", "--poly", "x^3-2", "--root", "3", "--n", "4",
    ]);
    assert!(out.status.success());
    let doc = json_of(&out);
    assert_eq!(doc["digits"][0], 3);
    assert_eq!(doc["digits"][1], 0);
    assert_eq!(doc["digits"][2], 2);
    assert_eq!(doc["digits"][3], 2);
    assert_eq!(doc["partial_sums"][2], "53");

    let out = run(&["digits", "--p", "5", "--poly", "x^3-2", "--root", "3", "--n", "0"]);
    let doc = json_of(&out);
    assert_eq!(doc["digits"].as_array().unwrap().len(), 1);
    assert_eq!(doc["digits"][0], 3);
}

#[test]
fn digits_command_rejects_multiple_roots_with_exit_4() {
    let out = run(&["digits", "--p", "2", "--poly", "x^2-4", "--root", "2", "--n", "3"]);
    assert_eq!(out.status.code(), Some(4));
    let doc = json_of(&out);
    assert_eq!(doc["error"]["kind"], "NotASimpleRoot");
}

#[test]
fn parse_errors_exit_2_with_stable_kind() {
    let out = run(&["value", "--p", "2", "--minpoly", SEXTIC, "--expr", "x^"]);
    assert_eq!(out.status.code(), Some(2));
    let doc = json_of(&out);
    assert_eq!(doc["error"]["kind"], "ParseError");
}

#[test]
fn branches_listing_matches_mod_p_groups() {
    let out = run(&["branches", "--p", "5", "--minpoly", SEXTIC]);
    let doc = json_of(&out);
    let branches = doc["branches"].as_array().unwrap();
    assert_eq!(branches.len(), 3);
    assert_eq!(branches[0]["residual"], "x^2+2");
    assert_eq!(branches[0]["local_degree"], 2);
}

#[test]
fn output_is_byte_identical_across_runs() {
    for args in [
        vec!["analyze", "--p", "3", "--minpoly", SEXTIC],
        vec!["value", "--p", "2", "--minpoly", SEXTIC, "--expr", "x^3"],
        vec!["branches", "--p", "5", "--minpoly", SEXTIC],
    ] {
        let first = run(&args);
        let second = run(&args);
        assert_eq!(first.stdout, second.stdout, "args {args:?}");
    }
}

#[test]
fn precision_cap_env_var_forces_exit_3() {
    // a cap equal to the initial precision leaves no room for the doubled
    // re-verification, so multi-branch values cannot stabilize
    let out = Command::new(env!("CARGO_BIN_EXE_maclane"))
        .args(["value", "--p", "5", "--minpoly", SEXTIC, "--expr", "x^2+1"])
        .env("MACLANE_MAX_PRECISION", "32")
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(3));
    let doc = json_of(&out);
    assert_eq!(doc["error"]["kind"], "PrecisionExhausted");
}

#[test]
fn all_branches_analyzes_every_branch() {
    let out = run(&["analyze", "--p", "5", "--minpoly", SEXTIC, "--all-branches"]);
    assert!(out.status.success());
    let doc = json_of(&out);
    assert_eq!(doc["branch_count"], 3);
    let reports = doc["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 3);
    for r in reports {
        assert_eq!(r["e"], 1);
        assert_eq!(r["f_res"], 2);
        assert_eq!(r["truncated"], true);
    }
}
