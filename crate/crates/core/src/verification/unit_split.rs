//! Splitting every project into unit-cost subprojects.

use crate::allocation::ApprovalProfile;
use crate::error::{Error, Result};
use crate::model::{Instance, ProjectSet, MAX_PROJECTS};

/// Correspondence between projects and their unit-cost subprojects.
///
/// Subprojects are numbered by (parent index, ordinal), so the canonical
/// tie-breaking on subprojects extends the one on projects.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnitSplitMap {
    forward: Vec<Vec<usize>>,
    backward: Vec<usize>,
}

impl UnitSplitMap {
    pub fn subprojects(&self, pos: usize) -> &[usize] {
        &self.forward[pos]
    }

    pub fn parent(&self, sub: usize) -> usize {
        self.backward[sub]
    }

    pub fn split(&self, set: ProjectSet) -> ProjectSet {
        set.iter()
            .flat_map(|p| self.forward[p].iter().copied())
            .collect()
    }

    /// Parents all of whose subprojects are in `set`, and parents only
    /// some of whose subprojects are.
    pub fn merge(&self, set: ProjectSet) -> (ProjectSet, ProjectSet) {
        let mut full = ProjectSet::EMPTY;
        let mut partial = ProjectSet::EMPTY;
        for (p, subs) in self.forward.iter().enumerate() {
            let hit = subs.iter().filter(|&&s| set.contains(s)).count();
            if hit == subs.len() {
                full.insert(p);
            } else if hit > 0 {
                partial.insert(p);
            }
        }
        (full, partial)
    }
}

pub fn unit_split(
    instance: &Instance,
    profile: &ApprovalProfile,
) -> Result<(Instance, ApprovalProfile, UnitSplitMap)> {
    let total = instance.total_cost(instance.all());
    Error::check_cap("number of subprojects", total, MAX_PROJECTS as u64)?;
    let mut forward = Vec::with_capacity(instance.len());
    let mut backward = Vec::with_capacity(total as usize);
    for p in 0..instance.len() {
        let start = backward.len();
        backward.extend(std::iter::repeat_n(p, instance.cost(p) as usize));
        forward.push((start..backward.len()).collect());
    }
    let split = Instance::unit(backward.len(), instance.budget())?;
    let map = UnitSplitMap { forward, backward };
    let ballots = profile.ballots().iter().map(|&b| map.split(b)).collect();
    Ok((split, ApprovalProfile::new(ballots), map))
}
