//! The exact rules agree with brute-force enumeration on seeded instances.

mod common;

use common::suites;

#[test]
fn equal_representation_matches_oracle() {
    let r = suites::equal_representation_oracle(1);
    assert!(r.passed(), "{r}");
}

#[test]
fn k_median_matches_oracle() {
    let r = suites::k_median_oracle(2);
    assert!(r.passed(), "{r}");
}

#[test]
fn allocation_rules_match_oracles() {
    let r = suites::allocation_oracle(3);
    assert!(r.passed(), "{r}");
}
