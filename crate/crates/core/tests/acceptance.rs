//! The ten acceptance criteria, one test each. Every test prints a single
//! `PASS`/`FAIL` line with the measured numbers before asserting.

use std::time::{Duration, Instant};

use mather_core::suite::{run_criterion, CriterionReport};
use mather_core::Tolerances;

const SEED: u64 = 7;

fn check(id: u8, budget: Option<Duration>) -> CriterionReport {
    let start = Instant::now();
    let rep = run_criterion(id, SEED, &Tolerances::default()).unwrap_or_else(|e| panic!("criterion {id}: {e}"));
    let elapsed = start.elapsed();
    println!("{}  ({:.2?}) {:?}", rep.line(), elapsed, rep.metrics);
    if let Some(limit) = budget {
        assert!(elapsed <= limit, "criterion {id} took {elapsed:.2?}, budget {limit:.2?}");
    }
    assert!(rep.pass, "{}", rep.line());
    rep
}

#[test]
fn c01_jet_oracle() {
    check(1, Some(Duration::from_secs(10)));
}

#[test]
fn c02_lcm_sandwich() {
    check(2, Some(Duration::from_secs(1)));
}

#[test]
fn c03_tameness() {
    check(3, None);
}

#[test]
fn c04_rolling_up() {
    check(4, None);
}

#[test]
fn c05_round_trip() {
    check(5, None);
}

#[test]
fn c06_norm_reduction_curve() {
    check(6, Some(Duration::from_secs(120)));
}

#[test]
fn c07_conjugacy() {
    check(7, None);
}

#[test]
fn c08_fragmentation() {
    check(8, None);
}

#[test]
fn c09_discrete_isotopy() {
    check(9, None);
}

#[test]
fn c10_fixed_point() {
    check(10, None);
}
