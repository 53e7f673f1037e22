//! Agent preferences: strict orders over the universe, awareness sets,
//! ideal sets, and the overlap / cost comparison models.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::greedy::greedy;
use crate::model::{Instance, ProjectId, ProjectSet};

/// A strict ranking of every project of the universe, most preferred first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreferenceOrder {
    ranking: Vec<usize>,
}

impl PreferenceOrder {
    pub fn from_ids(instance: &Instance, ids: &[ProjectId]) -> Result<Self> {
        let mut seen = ProjectSet::EMPTY;
        let mut ranking = Vec::with_capacity(ids.len());
        for &id in ids {
            let pos = instance
                .position(id)
                .ok_or_else(|| Error::invalid(format!("ranking names unknown project {id}")))?;
            if seen.contains(pos) {
                return Err(Error::invalid(format!("ranking lists {id} twice")));
            }
            seen.insert(pos);
            ranking.push(pos);
        }
        if seen != instance.all() {
            return Err(Error::invalid(
                "ranking must cover every project of the universe",
            ));
        }
        Ok(PreferenceOrder { ranking })
    }

    /// Ranks the listed projects first, in the given order, followed by the
    /// rest of the universe by ascending index.
    pub fn with_prefix(instance: &Instance, prefix: &[ProjectId]) -> Result<Self> {
        let head = instance.set_of(prefix)?;
        let mut ids = prefix.to_vec();
        ids.extend(
            instance
                .all()
                .difference(head)
                .iter()
                .map(|p| instance.id(p)),
        );
        PreferenceOrder::from_ids(instance, &ids)
    }

    pub fn from_positions(ranking: Vec<usize>) -> Self {
        PreferenceOrder { ranking }
    }

    pub fn positions(&self) -> &[usize] {
        &self.ranking
    }

    pub fn ids(&self, instance: &Instance) -> Vec<ProjectId> {
        self.ranking.iter().map(|&p| instance.id(p)).collect()
    }

    /// The order restricted to `available`.
    pub fn restricted(&self, available: ProjectSet) -> impl Iterator<Item = usize> + '_ {
        self.ranking
            .iter()
            .copied()
            .filter(move |&p| available.contains(p))
    }
}

/// An agent: a full preference order plus the projects she can conceive of.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Agent {
    pub order: PreferenceOrder,
    pub awareness: ProjectSet,
}

impl Agent {
    pub fn new(order: PreferenceOrder, awareness: ProjectSet) -> Self {
        Agent { order, awareness }
    }

    pub fn ideal(&self, instance: &Instance, available: ProjectSet) -> ProjectSet {
        ideal_set(instance, &self.order, available)
    }
}

/// Greedy selection over `available` following the agent's order.
pub fn ideal_set(
    instance: &Instance,
    order: &PreferenceOrder,
    available: ProjectSet,
) -> ProjectSet {
    let restricted: Vec<usize> = order.restricted(available).collect();
    greedy(instance, &restricted, instance.budget())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PreferenceModel {
    #[default]
    Overlap,
    Cost,
}

impl PreferenceModel {
    pub const ALL: [PreferenceModel; 2] = [PreferenceModel::Overlap, PreferenceModel::Cost];

    /// Value of `allocation` to an agent with the given ideal set.
    pub fn value(self, instance: &Instance, ideal: ProjectSet, allocation: ProjectSet) -> u64 {
        let common = allocation.intersection(ideal);
        match self {
            PreferenceModel::Overlap => common.len() as u64,
            PreferenceModel::Cost => instance.total_cost(common),
        }
    }

    /// `Greater` when `a` is strictly preferred to `b`.
    pub fn compare(
        self,
        instance: &Instance,
        ideal: ProjectSet,
        a: ProjectSet,
        b: ProjectSet,
    ) -> Ordering {
        self.value(instance, ideal, a)
            .cmp(&self.value(instance, ideal, b))
    }
}

/// The undominated members of `family`. Both models induce total
/// preorders, so these are exactly the maximisers of the value.
pub fn best_allocations(
    model: PreferenceModel,
    instance: &Instance,
    ideal: ProjectSet,
    family: &[ProjectSet],
) -> Result<Vec<ProjectSet>> {
    let top = family
        .iter()
        .map(|&a| model.value(instance, ideal, a))
        .max()
        .ok_or_else(|| Error::invalid("best allocations of an empty family"))?;
    Ok(family
        .iter()
        .copied()
        .filter(|&a| model.value(instance, ideal, a) == top)
        .collect())
}
