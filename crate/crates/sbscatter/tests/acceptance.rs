//! Acceptance criteria 1 to 10 at their stated tolerances, on the default configuration.
//! Each test prints its checks and a `criterion N: PASS|FAIL` line.

use sbscatter::config::ExperimentConfig;
use sbscatter::studies::{Study, StudyReport};
use std::collections::HashMap;
use std::io::Write;
use std::sync::{Mutex, OnceLock};

fn report(study: Study) -> StudyReport {
    static CACHE: OnceLock<Mutex<HashMap<&'static str, StudyReport>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
    map.entry(study.name())
        .or_insert_with(|| study.run_or_flag(&ExperimentConfig::default()))
        .clone()
}

// Written to the raw handle so the lines survive the harness's output capture.
fn say(line: &str) {
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "{line}");
}

fn criterion(n: u8, study: Study) {
    let r = report(study);
    if let Some(e) = &r.error {
        say(&format!("criterion {n}: FAIL ({e})"));
        panic!("criterion {n}: study did not complete: {e}");
    }
    let checks: Vec<_> = r.checks.iter().filter(|c| c.criterion == Some(n)).collect();
    assert!(!checks.is_empty(), "no checks for criterion {n}");
    for c in &checks {
        say(&format!("  criterion {n} [{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail));
    }
    let passed = checks.iter().all(|c| c.passed);
    say(&format!("criterion {n}: {}", if passed { "PASS" } else { "FAIL" }));
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    assert!(passed, "criterion {n} failed: {failed:?}");
}

#[test]
fn criterion_01_golden_rule_ratio() {
    criterion(1, Study::Resonance);
}

#[test]
fn criterion_02_dilation_independence() {
    criterion(2, Study::Resonance);
}

#[test]
fn criterion_03_oracle_agreement() {
    criterion(3, Study::Scatter);
}

#[test]
fn criterion_04_lorentzian_lineshape() {
    criterion(4, Study::Lineshape);
}

#[test]
fn criterion_05_second_order_scaling() {
    criterion(5, Study::Scatter);
}

#[test]
fn criterion_06_contour_propagation() {
    criterion(6, Study::Laplace);
}

#[test]
fn criterion_07_cutoff_ladder_convergence() {
    criterion(7, Study::Multiscale);
}

#[test]
fn criterion_08_asymptotic_annihilators() {
    criterion(8, Study::Asymptotics);
}

#[test]
fn criterion_09_relative_bounds() {
    criterion(9, Study::Estimates);
}

#[test]
fn criterion_10_overlap_decay() {
    criterion(10, Study::Asymptotics);
}
