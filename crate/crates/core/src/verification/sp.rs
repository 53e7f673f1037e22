//! Second-stage strategyproofness: can an agent gain by approving
//! something other than her ideal set?

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::PropertyVerdict;
use crate::allocation::{AllocationRule, ApprovalProfile};
use crate::error::{Error, Result};
use crate::model::{AllocationInstance, Instance, ProjectSet};
use crate::preferences::{ideal_set, PreferenceModel, PreferenceOrder};

/// Which ballots of the other agents are quantified over.
#[derive(Clone, Debug, PartialEq)]
pub enum SpMode {
    /// Others vote as in the given profile; the manipulator's own entry
    /// is ignored.
    FixedOthers(ApprovalProfile),
    /// Every profile, subject to `SpOptions::full_cap`.
    Full,
    /// Seeded random profiles of the others.
    Sampled { samples: u64, seed: u64 },
}

impl SpMode {
    pub fn name(&self) -> &'static str {
        match self {
            SpMode::FixedOthers(_) => "fixed-others",
            SpMode::Full => "full",
            SpMode::Sampled { .. } => "sampled",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpOptions {
    /// Allow the truthful outcome to be augmented by one project.
    pub approximate: bool,
    /// Only these manipulators (0-based); all agents when `None`.
    pub agents: Option<Vec<usize>>,
    /// Only these deviating ballots; every ballot when `None`.
    pub deviations: Option<Vec<ProjectSet>>,
    /// Largest number of full profiles enumerated in `SpMode::Full`.
    pub full_cap: u64,
}

impl SpOptions {
    pub const DEFAULT_FULL_CAP: u64 = 1 << 20;
}

impl Default for SpOptions {
    fn default() -> Self {
        SpOptions {
            approximate: false,
            agents: None,
            deviations: None,
            full_cap: Self::DEFAULT_FULL_CAP,
        }
    }
}

/// A profile where one agent gains by deviating from her ideal set.
#[derive(Clone, Debug, PartialEq)]
pub struct SpWitness {
    pub instance: Instance,
    pub shortlist: ProjectSet,
    pub model: PreferenceModel,
    pub approximate: bool,
    pub agent: usize,
    /// The agent's ideal set within the shortlist, i.e. her truthful ballot.
    pub ideal: ProjectSet,
    /// The profile with the agent voting truthfully.
    pub profile: ApprovalProfile,
    pub deviation: ProjectSet,
    pub truthful_outcome: ProjectSet,
    pub manipulated_outcome: ProjectSet,
}

impl SpWitness {
    /// Recomputes both outcomes and confirms the deviation pays off.
    pub fn replay(&self, rule: &dyn AllocationRule) -> Result<bool> {
        let inst = AllocationInstance::new(&self.instance, self.shortlist)?;
        let truthful = rule.allocate(&inst, &self.profile)?;
        let manipulated =
            rule.allocate(&inst, &self.profile.with_ballot(self.agent, self.deviation))?;
        Ok(truthful == self.truthful_outcome
            && manipulated == self.manipulated_outcome
            && gains(
                &inst,
                self.model,
                self.ideal,
                truthful,
                manipulated,
                self.approximate,
            ))
    }
}

/// Whether `manipulated` beats `truthful` (or, in approximate mode, beats
/// `truthful` plus any single shortlisted project).
fn gains(
    inst: &AllocationInstance<'_>,
    model: PreferenceModel,
    ideal: ProjectSet,
    truthful: ProjectSet,
    manipulated: ProjectSet,
    approximate: bool,
) -> bool {
    let value = |a| model.value(inst.universe, ideal, a);
    let baseline = if approximate {
        inst.shortlist
            .iter()
            .map(|p| value(truthful.with(p)))
            .max()
            .unwrap_or_else(|| value(truthful))
    } else {
        value(truthful)
    };
    value(manipulated) > baseline
}

/// Deviations closest to the truthful ballot first; among equally distant
/// ones, the canonically preferred difference first.
fn deviation_order(shortlist: ProjectSet, truthful: ProjectSet) -> Vec<ProjectSet> {
    let mut all: Vec<ProjectSet> = shortlist.subsets().filter(|&b| b != truthful).collect();
    all.sort_by(|&a, &b| {
        let (da, db) = (
            a.symmetric_difference(truthful),
            b.symmetric_difference(truthful),
        );
        da.len().cmp(&db.len()).then(db.canonical_cmp(da))
    });
    all
}

/// Searches for an agent and a profile in which the agent profits from
/// not approving her ideal set. The first hit in enumeration order
/// (agents ascending, then others' profiles, then deviations) is returned.
pub fn check_second_stage_sp(
    rule: &dyn AllocationRule,
    instance: &AllocationInstance<'_>,
    orders: &[PreferenceOrder],
    model: PreferenceModel,
    mode: &SpMode,
    options: &SpOptions,
) -> Result<PropertyVerdict<SpWitness>> {
    let n = orders.len();
    let property = format!(
        "{}{} ({}, {})",
        if options.approximate {
            "approximate strategyproofness of "
        } else {
            "strategyproofness of "
        },
        rule.name(),
        match model {
            PreferenceModel::Overlap => "overlap",
            PreferenceModel::Cost => "cost",
        },
        mode.name()
    );
    let shortlist = instance.shortlist;
    let ballots: Vec<ProjectSet> = shortlist.subsets().collect();
    if let SpMode::FixedOthers(p) = mode {
        if p.len() != n {
            return Err(Error::invalid(
                "profile length differs from the number of agents",
            ));
        }
        for b in p.ballots() {
            if !b.is_subset(shortlist) {
                return Err(Error::invalid("ballot outside the shortlist"));
            }
        }
    }
    if let SpMode::Full = mode {
        let total = (ballots.len() as u64)
            .checked_pow(n as u32)
            .unwrap_or(u64::MAX);
        Error::check_cap("number of full approval profiles", total, options.full_cap)?;
    }
    if let Some(devs) = &options.deviations {
        if devs.iter().any(|d| !d.is_subset(shortlist)) {
            return Err(Error::invalid("deviation outside the shortlist"));
        }
    }
    let agents: Vec<usize> = match &options.agents {
        Some(list) => {
            if list.iter().any(|&i| i >= n) {
                return Err(Error::invalid("manipulating agent out of range"));
            }
            list.clone()
        }
        None => (0..n).collect(),
    };

    let mut cases = 0u64;
    for &i in &agents {
        let ideal = ideal_set(instance.universe, &orders[i], shortlist);
        let deviations = match &options.deviations {
            Some(d) => d.iter().copied().filter(|&b| b != ideal).collect(),
            None => deviation_order(shortlist, ideal),
        };
        let check = |profile: ApprovalProfile| -> Result<Option<SpWitness>> {
            let truthful_outcome = rule.allocate(instance, &profile)?;
            for &dev in &deviations {
                let manipulated_outcome = rule.allocate(instance, &profile.with_ballot(i, dev))?;
                if gains(
                    instance,
                    model,
                    ideal,
                    truthful_outcome,
                    manipulated_outcome,
                    options.approximate,
                ) {
                    return Ok(Some(SpWitness {
                        instance: instance.universe.clone(),
                        shortlist,
                        model,
                        approximate: options.approximate,
                        agent: i,
                        ideal,
                        profile,
                        deviation: dev,
                        truthful_outcome,
                        manipulated_outcome,
                    }));
                }
            }
            Ok(None)
        };
        let found = match mode {
            SpMode::FixedOthers(p) => {
                cases += 1;
                check(p.with_ballot(i, ideal))?
            }
            SpMode::Full => {
                let mut digits = vec![0usize; n];
                let mut found = None;
                loop {
                    cases += 1;
                    let profile = ApprovalProfile::new(
                        (0..n)
                            .map(|j| if j == i { ideal } else { ballots[digits[j]] })
                            .collect(),
                    );
                    if let Some(w) = check(profile)? {
                        found = Some(w);
                        break;
                    }
                    // Advance the mixed-radix counter over the other agents.
                    let mut j = 0;
                    loop {
                        if j == n {
                            break;
                        }
                        if j != i {
                            digits[j] += 1;
                            if digits[j] < ballots.len() {
                                break;
                            }
                            digits[j] = 0;
                        }
                        j += 1;
                    }
                    if j == n {
                        break;
                    }
                }
                found
            }
            SpMode::Sampled { samples, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
                let mut found = None;
                for _ in 0..*samples {
                    cases += 1;
                    let profile = ApprovalProfile::new(
                        (0..n)
                            .map(|j| {
                                if j == i {
                                    ideal
                                } else {
                                    ProjectSet::from_bits(rng.gen::<u64>()).intersection(shortlist)
                                }
                            })
                            .collect(),
                    );
                    if let Some(w) = check(profile)? {
                        found = Some(w);
                        break;
                    }
                }
                found
            }
        };
        if let Some(w) = found {
            return Ok(PropertyVerdict::violated(property, true, cases, w));
        }
    }
    let exact = !matches!(mode, SpMode::Sampled { .. });
    Ok(PropertyVerdict::holds(property, exact, cases))
}
