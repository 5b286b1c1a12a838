//! End-to-end spot checks: every verifier, sampled parameters, small
//! dimensions. Larger dimensions and sample sweeps live in the command-line
//! crate's acceptance suite.

use ellint_core::identities::basic::{verify_bh1, verify_bh2, verify_bh3};
use ellint_core::identities::classical::{verify_classical_contiguous, verify_classical_euler};
use ellint_core::identities::elliptic::{
    verify_dixon_eval, verify_dixon_transform, verify_main, verify_selberg_eval,
    verify_selberg_transform,
};
use ellint_core::identities::lemma::verify_lemma;
use ellint_core::identities::limits::{bh1_limit_probe, verify_gamma_limits};
use ellint_core::identities::VerifySettings;
use ellint_core::sampling::{
    sample_bh1, sample_bh2, sample_bh3, sample_classical, sample_dixon, sample_gamma_limit,
    sample_lemma, sample_main, sample_selberg_eval, sample_selberg_transform, ClassicalVariant,
};
use ellint_core::identities::VerificationReport;

fn assert_passed(report: &VerificationReport) {
    assert!(
        report.passed,
        "{} (n={}, m={}, k={}) failed: rel_err = {:.3e}, lhs = {}, rhs = {}, converged = {:?}",
        report.identity,
        report.n,
        report.m,
        report.k,
        report.rel_err,
        report.lhs,
        report.rhs,
        report.grids.iter().map(|h| h.converged).collect::<Vec<_>>()
    );
}

const DEFAULTS: VerifySettings = VerifySettings { grid_start: None, target_rel: None, max_level: None };

#[test]
fn dixon_eval_rank_one() {
    let params = sample_dixon(1, 0, 11).unwrap();
    assert_passed(&verify_dixon_eval(&params, 1e-9, &DEFAULTS).unwrap());
}

#[test]
fn dixon_transform_rank_one_to_one() {
    let params = sample_dixon(1, 1, 12).unwrap();
    assert_passed(&verify_dixon_transform(&params, 1e-8, &DEFAULTS).unwrap());
}

#[test]
fn selberg_eval_rank_one() {
    let params = sample_selberg_eval(1, 13).unwrap();
    assert_passed(&verify_selberg_eval(&params, 1e-9, &DEFAULTS).unwrap());
}

#[test]
fn selberg_transform_rank_one() {
    let params = sample_selberg_transform(1, 14).unwrap();
    assert_passed(&verify_selberg_transform(&params, 1e-8, &DEFAULTS).unwrap());
}

#[test]
fn main_pure_evaluation() {
    let params = sample_main(1, 0, 15).unwrap();
    assert_passed(&verify_main(&params, 1e-9, &DEFAULTS).unwrap());
}

#[test]
fn main_rank_one_to_one() {
    let params = sample_main(1, 1, 16).unwrap();
    assert_passed(&verify_main(&params, 1e-8, &DEFAULTS).unwrap());
}

#[test]
fn lemma_rank_two() {
    let params = sample_lemma(2, 17).unwrap();
    assert_passed(&verify_lemma(&params, 1e-10, &DEFAULTS).unwrap());
}

#[test]
fn bh1_rank_one_to_one() {
    let params = sample_bh1(1, 1, 1, 18).unwrap();
    assert_passed(&verify_bh1(&params, 1e-8, &DEFAULTS).unwrap());
}

#[test]
fn bh2_rank_one_to_one() {
    let params = sample_bh2(1, 1, 19).unwrap();
    assert_passed(&verify_bh2(&params, 1e-8, &DEFAULTS).unwrap());
}

#[test]
fn bh3_rank_one_to_one() {
    let params = sample_bh3(1, 1, 1, 20).unwrap();
    assert_passed(&verify_bh3(&params, 1e-8, &DEFAULTS).unwrap());
}

#[test]
fn classical_euler_rank_one() {
    let params = sample_classical(ClassicalVariant::Euler, 1, 21).unwrap();
    assert_passed(&verify_classical_euler(&params, 1e-9, &DEFAULTS).unwrap());
}

#[test]
fn classical_contiguous_rank_one() {
    let params = sample_classical(ClassicalVariant::Contiguous, 1, 22).unwrap();
    assert_passed(&verify_classical_contiguous(&params, 1e-9, &DEFAULTS).unwrap());
}

#[test]
fn gamma_limit_probe() {
    let params = sample_gamma_limit(23).unwrap();
    assert_passed(&verify_gamma_limits(&params, 0.05, &DEFAULTS).unwrap());
}

#[test]
fn bh1_collapses_onto_single_nome_side() {
    let params = sample_bh1(1, 1, 1, 24).unwrap();
    let coarse = bh1_limit_probe(&params, 1e-3, &DEFAULTS).unwrap();
    let fine = bh1_limit_probe(&params, 1e-4, &DEFAULTS).unwrap();
    assert!(coarse.rel_gap < 0.05, "gap at p = 1e-3 is {:.3e}", coarse.rel_gap);
    assert!(
        fine.rel_gap < coarse.rel_gap / 5.0,
        "gap should shrink linearly: {:.3e} -> {:.3e}",
        coarse.rel_gap,
        fine.rel_gap
    );
}
