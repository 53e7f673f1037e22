//! Projects, instances and project sets.
//!
//! Projects of an [`Instance`] are stored in ascending id order. Every
//! [`ProjectSet`] is a bitmask over those positions, so position order and
//! id order coincide and the canonical tie-breaking rule (lowest index
//! first) becomes "lowest bit first".

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest universe a [`ProjectSet`] can address.
pub const MAX_PROJECTS: usize = 64;

/// The index `i` of project `p_i`. Always positive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct ProjectId(u32);

impl ProjectId {
    pub fn new(index: u32) -> Result<Self> {
        if index == 0 {
            return Err(Error::invalid("project indices start at 1"));
        }
        Ok(ProjectId(index))
    }

    pub fn index(self) -> u32 {
        self.0
    }
}

impl TryFrom<u32> for ProjectId {
    type Error = Error;

    fn try_from(value: u32) -> Result<Self> {
        ProjectId::new(value)
    }
}

impl From<ProjectId> for u32 {
    fn from(id: ProjectId) -> u32 {
        id.0
    }
}

impl fmt::Display for ProjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

/// Shorthand for building ids in tests and fixtures. Panics on zero.
pub fn pid(index: u32) -> ProjectId {
    ProjectId::new(index).expect("project index must be positive")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Project {
    pub id: ProjectId,
    pub cost: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<f64>>,
}

impl Project {
    pub fn new(id: ProjectId, cost: u64) -> Self {
        Project {
            id,
            cost,
            coords: None,
        }
    }

    pub fn with_coords(mut self, coords: Vec<f64>) -> Self {
        self.coords = Some(coords);
        self
    }
}

/// A set of projects of one instance, as a bitmask over project positions.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct ProjectSet(u64);

impl ProjectSet {
    pub const EMPTY: ProjectSet = ProjectSet(0);

    pub fn from_bits(bits: u64) -> Self {
        ProjectSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    /// The first `len` positions.
    pub fn full(len: usize) -> Self {
        debug_assert!(len <= MAX_PROJECTS);
        if len == MAX_PROJECTS {
            ProjectSet(u64::MAX)
        } else {
            ProjectSet((1u64 << len) - 1)
        }
    }

    pub fn singleton(pos: usize) -> Self {
        ProjectSet(1u64 << pos)
    }

    pub fn from_positions<I: IntoIterator<Item = usize>>(positions: I) -> Self {
        positions
            .into_iter()
            .fold(ProjectSet::EMPTY, |acc, p| acc.with(p))
    }

    pub fn contains(self, pos: usize) -> bool {
        pos < MAX_PROJECTS && self.0 & (1u64 << pos) != 0
    }

    #[must_use]
    pub fn with(self, pos: usize) -> Self {
        ProjectSet(self.0 | (1u64 << pos))
    }

    #[must_use]
    pub fn without(self, pos: usize) -> Self {
        ProjectSet(self.0 & !(1u64 << pos))
    }

    pub fn insert(&mut self, pos: usize) {
        self.0 |= 1u64 << pos;
    }

    pub fn union(self, other: ProjectSet) -> Self {
        ProjectSet(self.0 | other.0)
    }

    pub fn intersection(self, other: ProjectSet) -> Self {
        ProjectSet(self.0 & other.0)
    }

    pub fn difference(self, other: ProjectSet) -> Self {
        ProjectSet(self.0 & !other.0)
    }

    pub fn symmetric_difference(self, other: ProjectSet) -> Self {
        ProjectSet(self.0 ^ other.0)
    }

    pub fn is_subset(self, other: ProjectSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Lowest position in the set.
    pub fn first(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    /// Positions in ascending order.
    pub fn iter(self) -> Positions {
        Positions(self.0)
    }

    /// Every subset of `self`, starting from the empty set.
    pub fn subsets(self) -> Subsets {
        Subsets {
            mask: self.0,
            next: Some(0),
        }
    }

    /// Comparison under the canonical tie-breaking rule on sets: `Greater`
    /// means `self` is preferred, i.e. the lowest position on which the two
    /// sets differ belongs to `self`.
    pub fn canonical_cmp(self, other: ProjectSet) -> Ordering {
        let diff = self.0 ^ other.0;
        if diff == 0 {
            Ordering::Equal
        } else if self.0 & diff & diff.wrapping_neg() != 0 {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }
}

impl fmt::Debug for ProjectSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<usize> for ProjectSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        ProjectSet::from_positions(iter)
    }
}

impl IntoIterator for ProjectSet {
    type Item = usize;
    type IntoIter = Positions;

    fn into_iter(self) -> Positions {
        self.iter()
    }
}

pub struct Positions(u64);

impl Iterator for Positions {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let pos = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(pos)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Positions {}

pub struct Subsets {
    mask: u64,
    next: Option<u64>,
}

impl Iterator for Subsets {
    type Item = ProjectSet;

    fn next(&mut self) -> Option<ProjectSet> {
        let current = self.next?;
        // Standard submask increment: walks all submasks in ascending order.
        let successor = current.wrapping_sub(self.mask) & self.mask;
        self.next = (successor != 0).then_some(successor);
        Some(ProjectSet(current))
    }
}

/// A universe of projects with costs and a budget limit.
///
/// Serves both as the shortlisting instance and, together with a shortlist,
/// as the allocation instance.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    projects: Vec<Project>,
    budget: u64,
}

impl Instance {
    pub fn new(mut projects: Vec<Project>, budget: u64) -> Result<Self> {
        if budget == 0 {
            return Err(Error::invalid("budget must be positive"));
        }
        if projects.len() > MAX_PROJECTS {
            return Err(Error::ResourceLimit {
                what: "number of projects",
                actual: projects.len() as u64,
                cap: MAX_PROJECTS as u64,
            });
        }
        projects.sort_by_key(|p| p.id);
        for pair in projects.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(Error::invalid(format!(
                    "duplicate project id {}",
                    pair[0].id
                )));
            }
        }
        for p in &projects {
            if p.cost == 0 {
                return Err(Error::invalid(format!(
                    "{} has cost 0; costs must be at least 1",
                    p.id
                )));
            }
            if p.cost > budget {
                return Err(Error::invalid(format!(
                    "{} costs {} which exceeds the budget {}",
                    p.id, p.cost, budget
                )));
            }
        }
        Ok(Instance { projects, budget })
    }

    /// Projects `p_1..p_m` with the given costs.
    pub fn with_costs(costs: &[u64], budget: u64) -> Result<Self> {
        let projects = costs
            .iter()
            .enumerate()
            .map(|(i, &c)| Project::new(pid(i as u32 + 1), c))
            .collect();
        Instance::new(projects, budget)
    }

    pub fn unit(m: usize, budget: u64) -> Result<Self> {
        Instance::with_costs(&vec![1; m], budget)
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn len(&self) -> usize {
        self.projects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projects.is_empty()
    }

    pub fn projects(&self) -> &[Project] {
        &self.projects
    }

    pub fn project(&self, pos: usize) -> &Project {
        &self.projects[pos]
    }

    pub fn cost(&self, pos: usize) -> u64 {
        self.projects[pos].cost
    }

    pub fn id(&self, pos: usize) -> ProjectId {
        self.projects[pos].id
    }

    pub fn position(&self, id: ProjectId) -> Option<usize> {
        self.projects.binary_search_by_key(&id, |p| p.id).ok()
    }

    pub fn all(&self) -> ProjectSet {
        ProjectSet::full(self.len())
    }

    pub fn set_of(&self, ids: &[ProjectId]) -> Result<ProjectSet> {
        ids.iter().try_fold(ProjectSet::EMPTY, |acc, &id| {
            self.position(id)
                .map(|pos| acc.with(pos))
                .ok_or_else(|| Error::invalid(format!("unknown project {id}")))
        })
    }

    /// Like [`Instance::set_of`] but from raw indices.
    pub fn set_of_indices(&self, indices: &[u32]) -> Result<ProjectSet> {
        let ids = indices
            .iter()
            .map(|&i| ProjectId::new(i))
            .collect::<Result<Vec<_>>>()?;
        self.set_of(&ids)
    }

    pub fn ids(&self, set: ProjectSet) -> Vec<ProjectId> {
        set.iter().map(|pos| self.id(pos)).collect()
    }

    pub fn indices(&self, set: ProjectSet) -> Vec<u32> {
        set.iter().map(|pos| self.id(pos).index()).collect()
    }

    pub fn total_cost(&self, set: ProjectSet) -> u64 {
        set.iter().map(|pos| self.cost(pos)).sum()
    }

    /// Total cost of a set given by ids; unknown ids are rejected.
    pub fn total_cost_of(&self, ids: &[ProjectId]) -> Result<u64> {
        Ok(self.total_cost(self.set_of(ids)?))
    }

    /// True when every project has the same cost.
    pub fn is_unit_cost(&self) -> bool {
        self.projects.windows(2).all(|w| w[0].cost == w[1].cost)
    }

    /// Human-readable `{p1, p4}` rendering.
    pub fn display(&self, set: ProjectSet) -> String {
        let names: Vec<String> = set.iter().map(|p| self.id(p).to_string()).collect();
        format!("{{{}}}", names.join(", "))
    }
}

/// Classification of a budget allocation with respect to a shortlist.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AllocationStatus {
    Infeasible,
    FeasibleNotExhaustive,
    Exhaustive,
}

/// An instance restricted to a shortlist.
#[derive(Clone, Copy, Debug)]
pub struct AllocationInstance<'a> {
    pub universe: &'a Instance,
    pub shortlist: ProjectSet,
}

impl<'a> AllocationInstance<'a> {
    pub fn new(universe: &'a Instance, shortlist: ProjectSet) -> Result<Self> {
        if !shortlist.is_subset(universe.all()) {
            return Err(Error::invalid("shortlist refers to unknown projects"));
        }
        Ok(AllocationInstance {
            universe,
            shortlist,
        })
    }

    pub fn budget(&self) -> u64 {
        self.universe.budget()
    }

    pub fn cost(&self, pos: usize) -> u64 {
        self.universe.cost(pos)
    }

    pub fn total_cost(&self, set: ProjectSet) -> u64 {
        self.universe.total_cost(set)
    }

    pub fn is_feasible(&self, allocation: ProjectSet) -> bool {
        self.total_cost(allocation) <= self.budget()
    }

    /// Feasible, and no shortlisted project outside it fits the residual budget.
    pub fn is_exhaustive(&self, allocation: ProjectSet) -> bool {
        self.classify(allocation) == AllocationStatus::Exhaustive
    }

    pub fn classify(&self, allocation: ProjectSet) -> AllocationStatus {
        let spent = self.total_cost(allocation);
        if spent > self.budget() {
            return AllocationStatus::Infeasible;
        }
        let residual = self.budget() - spent;
        let fits = self
            .shortlist
            .difference(allocation)
            .iter()
            .any(|pos| self.cost(pos) <= residual);
        if fits {
            AllocationStatus::FeasibleNotExhaustive
        } else {
            AllocationStatus::Exhaustive
        }
    }

    /// Unit-cost instance in the sense of the unit-cost class: all
    /// shortlisted projects share one cost.
    pub fn is_unit_cost(&self) -> bool {
        let mut costs = self.shortlist.iter().map(|p| self.cost(p));
        match costs.next() {
            Some(first) => costs.all(|c| c == first),
            None => true,
        }
    }
}
