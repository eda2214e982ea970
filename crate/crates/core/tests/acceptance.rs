//! The numerical acceptance criteria, one test each. Every test prints a
//! single PASS/FAIL line before asserting, so `cargo test --test acceptance
//! -- --nocapture --test-threads 1` doubles as a report.

use magnon_blockade::verify::{self, VerifyOptions};

fn check(id: u8) {
    let r = verify::run(id, &VerifyOptions::default());
    println!("{}", r.line());
    println!("      {}", r.detail);
    assert!(
        r.passed,
        "criterion {id} failed: computed {}; {}",
        r.computed, r.detail
    );
}

#[test]
fn c01_delta_opt_closed_form() {
    check(1);
}

#[test]
fn c02_g_opt_closed_form() {
    check(2);
}

#[test]
fn c03_perfect_blockade() {
    check(3);
}

#[test]
fn c04_weakdrive_matches_master_equation() {
    check(4);
}

#[test]
fn c05_nonreciprocity_at_optimum() {
    check(5);
}

#[test]
fn c06_feasibility_gate() {
    check(6);
}

#[test]
fn c07_two_sphere_reciprocity() {
    check(7);
}

#[test]
fn c08_two_sphere_symmetric_optimum() {
    check(8);
}

#[test]
fn c09_asymmetric_two_sphere_optima() {
    check(9);
}

#[test]
fn c10_mirror_symmetry() {
    check(10);
}

#[test]
fn c11_linear_limit() {
    check(11);
}

#[test]
fn c12_drive_window() {
    check(12);
}

#[test]
fn c13_thermal_trend_and_generator_identity() {
    check(13);
}

#[test]
fn c14_residual_root_matches_argmin() {
    check(14);
}
