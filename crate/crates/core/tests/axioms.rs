//! Shortlisting and allocation axioms on seeded suites.

mod common;

use common::suites::{self, RuleChoice, ShortlistAxiom};
use pbflow::verification::AllocationAxiom;
use pbflow::{ApprovalMaximising, GreedyApproval};

#[test]
fn nomination_is_non_wasteful_and_representation_efficient() {
    for axiom in [
        ShortlistAxiom::NonWasteful,
        ShortlistAxiom::RepresentationEfficient,
    ] {
        let r = suites::shortlist_axiom(&RuleChoice::Nomination, axiom, 11);
        assert!(r.passed(), "{axiom:?}: {r}");
    }
}

#[test]
fn equal_representation_axioms() {
    for k in 2..=3 {
        let r = suites::shortlist_axiom(
            &RuleChoice::EqualRepresentation(k),
            ShortlistAxiom::NonWasteful,
            12,
        );
        assert!(r.passed(), "k {k}: {r}");
    }
    for k in 1..=3 {
        let r = suites::shortlist_axiom(
            &RuleChoice::EqualRepresentation(k),
            ShortlistAxiom::RepresentationEfficient,
            13,
        );
        assert!(r.passed(), "k {k}: {r}");
    }
}

#[test]
fn one_equal_representation_can_be_wasteful() {
    let r = suites::shortlist_axiom(
        &RuleChoice::EqualRepresentation(1),
        ShortlistAxiom::NonWasteful,
        12,
    );
    assert!(r.failure_count > 0, "{r}");
}

#[test]
fn k_median_is_non_wasteful_for_k_at_least_two() {
    for k in 2..=3 {
        let r = suites::shortlist_axiom(&RuleChoice::KMedian(k), ShortlistAxiom::NonWasteful, 14);
        assert!(r.passed(), "k {k}: {r}");
    }
}

#[test]
fn k_median_domination_is_found() {
    let (tried, witness) = suites::k_median_domination(15);
    assert!(witness.is_some(), "none in {tried} profiles");
}

#[test]
fn greedy_approval_axioms_hold() {
    let r = suites::allocation_axioms(&GreedyApproval, &AllocationAxiom::ALL, 16);
    assert!(r.passed(), "{r}");
}

#[test]
fn approval_maximising_is_exhaustive_and_unanimous() {
    let axioms = [AllocationAxiom::Exhaustive, AllocationAxiom::Unanimous];
    let r = suites::allocation_axioms(&ApprovalMaximising::canonical(), &axioms, 16);
    assert!(r.passed(), "{r}");
}

// Two agents approving A give each of its projects score 2; the third can
// approve two projects outside A worth 2 together, and T may prefer them.
#[test]
fn approval_maximising_is_not_strongly_unanimous() {
    let r = suites::allocation_axioms(
        &ApprovalMaximising::canonical(),
        &[AllocationAxiom::StronglyUnanimous],
        16,
    );
    assert!(r.failure_count > 0, "{r}");
}
