//! Acceptance gate: one test per criterion of the verification suite.
//! Each test prints a single PASS/FAIL line (visible with --nocapture)
//! and fails the build on any mismatch. The CLI's `verify-paper`
//! subcommand runs the same checks.

use ppboole::suite;

fn criterion(name: &str) {
    let r = suite::run_named(name).unwrap_or_else(|| panic!("unknown check {name}"));
    let tag = if r.passed { "PASS" } else { "FAIL" };
    println!("{tag} {} ({:.2?}): {}", r.name, r.elapsed, r.detail);
    assert!(r.passed, "{}: {}", r.name, r.detail);
}

#[test]
fn criterion_01_duality_collapse() {
    criterion("duality-collapse");
}

#[test]
fn criterion_02_collapse_to_top_and_bottom() {
    criterion("collapse-to-top-and-bottom");
}

#[test]
fn criterion_03_lattice_majority_equivalence() {
    criterion("lattice-majority-equivalence");
}

#[test]
fn criterion_04_idempotent_reduct() {
    criterion("idempotent-reduct");
}

#[test]
fn criterion_05_atom_incomparability() {
    criterion("atom-incomparability");
}

#[test]
fn criterion_06_pairwise_structure_separations() {
    criterion("pairwise-structure-separations");
}

#[test]
fn criterion_07_blocker_chain_separations() {
    criterion("blocker-chain-separations");
}

#[test]
fn criterion_08_hm_qj_separations() {
    criterion("hm-qj-separations");
}

#[test]
fn criterion_09_coatom_constancy() {
    criterion("coatom-constancy");
}

#[test]
fn criterion_10_canonical_classifications() {
    criterion("canonical-classifications");
}

#[test]
fn criterion_11_decision_table_regeneration() {
    criterion("decision-table-regeneration");
}

#[test]
fn criterion_12_reduction_equisatisfiability() {
    criterion("reduction-equisatisfiability");
}

#[test]
fn criterion_13_lattice_shape() {
    criterion("lattice-shape");
}

#[test]
fn suite_covers_every_criterion() {
    assert_eq!(suite::check_names().len(), 13);
}
