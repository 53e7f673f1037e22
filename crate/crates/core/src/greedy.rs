use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::model::{Instance, ProjectId, ProjectSet};

/// Greedy selection over positions: walk `order`, keep each project that
/// still fits the budget. Skipped projects are never revisited.
pub fn greedy(instance: &Instance, order: &[usize], budget: u64) -> ProjectSet {
    let mut spent = 0u64;
    let mut chosen = ProjectSet::EMPTY;
    for &pos in order {
        let cost = instance.cost(pos);
        if spent + cost <= budget {
            spent += cost;
            chosen.insert(pos);
        }
    }
    chosen
}

/// Greedy selection of `set` following `order`.
///
/// `order` must list exactly the members of `set`, each once.
pub fn greedy_select(
    instance: &Instance,
    set: &[ProjectId],
    order: &[ProjectId],
    budget: u64,
) -> Result<Vec<ProjectId>> {
    let wanted: BTreeSet<ProjectId> = set.iter().copied().collect();
    let listed: BTreeSet<ProjectId> = order.iter().copied().collect();
    if listed.len() != order.len() {
        return Err(Error::invalid("order lists a project twice"));
    }
    if wanted != listed {
        return Err(Error::invalid("order does not cover exactly the given set"));
    }
    let positions = order
        .iter()
        .map(|&id| {
            instance
                .position(id)
                .ok_or_else(|| Error::invalid(format!("unknown project {id}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(instance.ids(greedy(instance, &positions, budget)))
}
