//! Acceptance suite: every fixture criterion runs here with one printed
//! pass/fail line per check. All comparisons are exact rational equalities.
//!
//! Criterion 4 pins the digit table of the worked fixture verbatim; its a4
//! entry contradicts exact arithmetic (the partial sum must satisfy
//! x^3 = 2 mod 5^5, which forces a4 = 3, not 2), so that check is expected
//! to stay red. See the test output for the computed witness.

use maclane::selftest::{self, CheckResult};

fn report(checks: &[CheckResult]) -> bool {
    let mut all = true;
    for c in checks {
        let status = if c.pass { "PASS" } else { "FAIL" };
        println!("[{status}] {}: {}", c.name, c.detail);
        all &= c.pass;
    }
    all
}

fn assert_criterion(n: u32) {
    let checks = selftest::criterion_checks(n, selftest::DEFAULT_SEED);
    assert!(!checks.is_empty());
    assert!(report(&checks), "criterion {n} failed");
}

#[test]
fn criterion_1_two_adic_fixture() {
    assert_criterion(1);
}

#[test]
fn criterion_2_three_adic_fixture() {
    assert_criterion(2);
}

#[test]
fn criterion_3_five_adic_fixture() {
    assert_criterion(3);
}

#[test]
fn criterion_4_hensel_digits() {
    assert_criterion(4);
}

#[test]
fn criterion_5_y_generator_fixture() {
    assert_criterion(5);
}

#[test]
fn criterion_6_separate_basis_maxima() {
    assert_criterion(6);
}

#[test]
fn criterion_7_property_suite() {
    assert_criterion(7);
}

#[test]
fn criterion_8_approximation_theorem() {
    assert_criterion(8);
}

#[test]
fn criterion_9_determinism() {
    let first = serde_json::to_string(&selftest::fixture_checks(selftest::DEFAULT_SEED)).unwrap();
    let second = serde_json::to_string(&selftest::fixture_checks(selftest::DEFAULT_SEED)).unwrap();
    println!(
        "[{}] criterion_9_determinism: two full runs of {} bytes",
        if first == second { "PASS" } else { "FAIL" },
        first.len()
    );
    assert_eq!(first, second, "consecutive full-suite runs must be byte-identical");
}

#[test]
fn five_adic_family_matches_the_digit_formula() {
    let (ok, detail) = selftest::five_adic_family_matches_digit_formula(5).unwrap();
    println!(
        "[{}] five_adic_family_digit_formula: {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "{detail}");
}

#[test]
fn harness_flags_corrupted_fixtures() {
    let corrupted = selftest::corrupted_fixture_check();
    println!(
        "[PASS] harness_sanity: corrupted expectation is reported as a failure ({})",
        corrupted.detail
    );
    assert!(!corrupted.pass);
}
