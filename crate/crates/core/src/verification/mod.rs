//! Axiom checkers and second-stage strategyproofness search.

mod sp;
pub mod suite;
mod unit_split;

pub use sp::{check_second_stage_sp, SpMode, SpOptions, SpWitness};
pub use unit_split::{unit_split, UnitSplitMap};

use serde::{Deserialize, Serialize};

use crate::allocation::{AllocationRule, ApprovalProfile};
use crate::error::{Error, Result};
use crate::model::{AllocationInstance, Instance, ProjectSet};
use crate::shortlisting::{ShortlistingProfile, ShortlistingRule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictStatus {
    HoldsOnSuite,
    CounterexampleFound,
}

/// Outcome of checking a property over one case or a whole suite.
///
/// `exact` is false whenever part of the search space was sampled rather
/// than enumerated; such a verdict can refute but never prove.
#[derive(Clone, Debug, PartialEq)]
pub struct PropertyVerdict<W> {
    pub property: String,
    pub status: VerdictStatus,
    pub exact: bool,
    pub cases: u64,
    pub witness: Option<W>,
}

impl<W> PropertyVerdict<W> {
    pub fn holds(property: impl Into<String>, exact: bool, cases: u64) -> Self {
        PropertyVerdict {
            property: property.into(),
            status: VerdictStatus::HoldsOnSuite,
            exact,
            cases,
            witness: None,
        }
    }

    pub fn violated(property: impl Into<String>, exact: bool, cases: u64, witness: W) -> Self {
        PropertyVerdict {
            property: property.into(),
            status: VerdictStatus::CounterexampleFound,
            exact,
            cases,
            witness: Some(witness),
        }
    }

    pub fn is_holding(&self) -> bool {
        self.status == VerdictStatus::HoldsOnSuite
    }

    /// Folds the verdict of one more case into a suite verdict. The first
    /// counterexample is kept.
    pub fn absorb(&mut self, other: PropertyVerdict<W>) {
        self.cases += other.cases;
        self.exact &= other.exact;
        if self.witness.is_none() && other.witness.is_some() {
            self.status = VerdictStatus::CounterexampleFound;
            self.witness = other.witness;
        }
    }
}

/// A shortlisting rule output that breaks an axiom.
#[derive(Clone, Debug, PartialEq)]
pub struct ShortlistWitness {
    pub instance: Instance,
    pub profile: ShortlistingProfile,
    pub shortlist: ProjectSet,
    /// For representation efficiency: a dominating alternative.
    pub dominating: Option<ProjectSet>,
}

impl ShortlistWitness {
    /// Recomputes the shortlist and confirms the recorded violation.
    pub fn replay(&self, rule: &dyn ShortlistingRule) -> Result<bool> {
        let shortlist = rule.shortlist(&self.instance, &self.profile)?;
        if shortlist != self.shortlist {
            return Ok(false);
        }
        Ok(match self.dominating {
            None => !is_non_wasteful(&self.instance, &self.profile, shortlist),
            Some(d) => dominates(&self.instance, &self.profile, d, shortlist),
        })
    }
}

pub fn is_non_wasteful(
    instance: &Instance,
    profile: &ShortlistingProfile,
    shortlist: ProjectSet,
) -> bool {
    instance.total_cost(shortlist) >= instance.budget() || shortlist == profile.union()
}

pub fn check_non_wasteful(
    rule: &dyn ShortlistingRule,
    instance: &Instance,
    profile: &ShortlistingProfile,
) -> Result<PropertyVerdict<ShortlistWitness>> {
    let property = format!("non-wastefulness of {}", rule.name());
    let shortlist = rule.shortlist(instance, profile)?;
    if is_non_wasteful(instance, profile, shortlist) {
        Ok(PropertyVerdict::holds(property, true, 1))
    } else {
        let witness = ShortlistWitness {
            instance: instance.clone(),
            profile: profile.clone(),
            shortlist,
            dominating: None,
        };
        Ok(PropertyVerdict::violated(property, true, 1, witness))
    }
}

/// True when `alt` representatively dominates `shortlist`.
pub fn dominates(
    instance: &Instance,
    profile: &ShortlistingProfile,
    alt: ProjectSet,
    shortlist: ProjectSet,
) -> bool {
    if instance.total_cost(alt) > instance.total_cost(shortlist) {
        return false;
    }
    let mut strict = false;
    for &p in profile.proposals() {
        let (a, b) = (p.intersection(alt).len(), p.intersection(shortlist).len());
        if a < b {
            return false;
        }
        strict |= a > b;
    }
    strict
}

pub const DOMINATION_CAP: usize = 15;

/// Searches the subsets of the proposed projects for one that
/// representatively dominates `shortlist`. Projects nobody proposed cost
/// something and help nobody, so they never need to be considered.
pub fn find_representative_domination(
    instance: &Instance,
    profile: &ShortlistingProfile,
    shortlist: ProjectSet,
    cap: usize,
) -> Result<Option<ProjectSet>> {
    let union = profile.union();
    Error::check_cap(
        "number of proposed projects",
        union.len() as u64,
        cap as u64,
    )?;
    Ok(union
        .subsets()
        .find(|&alt| dominates(instance, profile, alt, shortlist)))
}

pub fn check_representation_efficient(
    rule: &dyn ShortlistingRule,
    instance: &Instance,
    profile: &ShortlistingProfile,
) -> Result<PropertyVerdict<ShortlistWitness>> {
    let property = format!("representation efficiency of {}", rule.name());
    let shortlist = rule.shortlist(instance, profile)?;
    match find_representative_domination(instance, profile, shortlist, DOMINATION_CAP)? {
        None => Ok(PropertyVerdict::holds(property, true, 1)),
        Some(d) => Ok(PropertyVerdict::violated(
            property,
            true,
            1,
            ShortlistWitness {
                instance: instance.clone(),
                profile: profile.clone(),
                shortlist,
                dominating: Some(d),
            },
        )),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AllocationAxiom {
    Exhaustive,
    Unanimous,
    StronglyUnanimous,
}

impl AllocationAxiom {
    pub const ALL: [AllocationAxiom; 3] = [
        AllocationAxiom::Exhaustive,
        AllocationAxiom::Unanimous,
        AllocationAxiom::StronglyUnanimous,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AllocationAxiom::Exhaustive => "exhaustive",
            AllocationAxiom::Unanimous => "unanimous",
            AllocationAxiom::StronglyUnanimous => "strongly-unanimous",
        }
    }
}

/// An allocation rule output that breaks an axiom.
#[derive(Clone, Debug, PartialEq)]
pub struct AllocationWitness {
    pub axiom: AllocationAxiom,
    pub instance: Instance,
    pub shortlist: ProjectSet,
    pub profile: ApprovalProfile,
    pub outcome: ProjectSet,
    /// The allocation the unanimity axioms require to be contained.
    pub required: Option<ProjectSet>,
}

impl AllocationWitness {
    pub fn replay(&self, rule: &dyn AllocationRule) -> Result<bool> {
        let inst = AllocationInstance::new(&self.instance, self.shortlist)?;
        let outcome = rule.allocate(&inst, &self.profile)?;
        Ok(outcome == self.outcome
            && match self.required {
                None => !inst.is_exhaustive(outcome),
                Some(a) => !a.is_subset(outcome),
            })
    }
}

/// Checks one axiom on one allocation instance.
///
/// Exhaustiveness is checked on `profile`. The unanimity axioms quantify
/// over every feasible allocation `A`: unanimity on `(A, ..., A)` with as
/// many agents as `profile` (at least one), strong unanimity on every
/// profile where all agents but one approve `A`, the odd one out casting
/// any ballot. Strong unanimity needs at least three agents and is
/// vacuous otherwise.
pub fn check_allocation_axiom(
    rule: &dyn AllocationRule,
    axiom: AllocationAxiom,
    instance: &AllocationInstance<'_>,
    profile: &ApprovalProfile,
) -> Result<PropertyVerdict<AllocationWitness>> {
    let property = format!("{} is {}", rule.name(), axiom.name());
    let witness = |profile: &ApprovalProfile, outcome, required| AllocationWitness {
        axiom,
        instance: instance.universe.clone(),
        shortlist: instance.shortlist,
        profile: profile.clone(),
        outcome,
        required,
    };
    let mut cases = 0u64;
    match axiom {
        AllocationAxiom::Exhaustive => {
            cases += 1;
            let outcome = rule.allocate(instance, profile)?;
            if !instance.is_exhaustive(outcome) {
                return Ok(PropertyVerdict::violated(
                    property,
                    true,
                    cases,
                    witness(profile, outcome, None),
                ));
            }
        }
        AllocationAxiom::Unanimous => {
            let n = profile.len().max(1);
            for a in instance
                .shortlist
                .subsets()
                .filter(|&a| instance.is_feasible(a))
            {
                cases += 1;
                let unanimous = ApprovalProfile::new(vec![a; n]);
                let outcome = rule.allocate(instance, &unanimous)?;
                if !a.is_subset(outcome) {
                    return Ok(PropertyVerdict::violated(
                        property,
                        true,
                        cases,
                        witness(&unanimous, outcome, Some(a)),
                    ));
                }
            }
        }
        AllocationAxiom::StronglyUnanimous => {
            let n = profile.len();
            if n >= 3 {
                for a in instance
                    .shortlist
                    .subsets()
                    .filter(|&a| instance.is_feasible(a))
                {
                    for odd in 0..n {
                        for ballot in instance.shortlist.subsets() {
                            cases += 1;
                            let p = ApprovalProfile::new(vec![a; n]).with_ballot(odd, ballot);
                            let outcome = rule.allocate(instance, &p)?;
                            if !a.is_subset(outcome) {
                                return Ok(PropertyVerdict::violated(
                                    property,
                                    true,
                                    cases,
                                    witness(&p, outcome, Some(a)),
                                ));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(PropertyVerdict::holds(property, true, cases))
}
