//! The canonical tie-breaking rule: lowest project index wins.
//!
//! It comes in three forms: on a set of projects (pick the lowest index),
//! on a weak order (refine each indifference class by ascending index) and
//! on a family of sets (pick the set that contains the lowest-indexed
//! project of its symmetric difference with every other member).

use std::cmp::Ordering;
use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::model::{ProjectId, ProjectSet};

pub fn tiebreak_project(set: &[ProjectId]) -> Result<ProjectId> {
    set.iter()
        .copied()
        .min()
        .ok_or_else(|| Error::invalid("cannot break ties in an empty set"))
}

/// Turns ranked indifference classes into a strict order.
///
/// `classes` must partition `domain`.
pub fn tiebreak_order(classes: &[Vec<ProjectId>], domain: &[ProjectId]) -> Result<Vec<ProjectId>> {
    let mut seen = BTreeSet::new();
    let mut order = Vec::with_capacity(domain.len());
    for class in classes {
        let mut class = class.clone();
        class.sort();
        for id in class {
            if !seen.insert(id) {
                return Err(Error::invalid(format!(
                    "{id} appears in more than one class"
                )));
            }
            order.push(id);
        }
    }
    let domain: BTreeSet<ProjectId> = domain.iter().copied().collect();
    if seen != domain {
        return Err(Error::invalid(
            "indifference classes do not partition the project set",
        ));
    }
    Ok(order)
}

/// Orders two sets of ids under the canonical rule; `Greater` means `a` wins.
pub fn canonical_cmp_ids(a: &BTreeSet<ProjectId>, b: &BTreeSet<ProjectId>) -> Ordering {
    match a.symmetric_difference(b).min() {
        None => Ordering::Equal,
        Some(lowest) if a.contains(lowest) => Ordering::Greater,
        Some(_) => Ordering::Less,
    }
}

pub fn tiebreak_family(family: &[BTreeSet<ProjectId>]) -> Result<BTreeSet<ProjectId>> {
    family
        .iter()
        .max_by(|a, b| canonical_cmp_ids(a, b))
        .cloned()
        .ok_or_else(|| Error::invalid("cannot break ties in an empty family"))
}

/// Position-level family tie-breaking; `None` for an empty family.
pub fn tiebreak_sets<I: IntoIterator<Item = ProjectSet>>(family: I) -> Option<ProjectSet> {
    family.into_iter().max_by(|a, b| a.canonical_cmp(*b))
}

/// Strict order over `set` by descending score, ties by ascending position.
pub fn order_by_score_desc(set: ProjectSet, score: impl Fn(usize) -> u64) -> Vec<usize> {
    let mut order: Vec<usize> = set.iter().collect();
    order.sort_by(|&a, &b| score(b).cmp(&score(a)).then(a.cmp(&b)));
    order
}
