//! Seeded random scenario generators for property suites.

use std::fmt;
use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::allocation::ApprovalProfile;
use crate::model::{pid, Instance, Project, ProjectSet};
use crate::preferences::PreferenceOrder;
use crate::shortlisting::ShortlistingProfile;

pub type SuiteRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SuiteRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteParams {
    pub projects: RangeInclusive<usize>,
    pub agents: RangeInclusive<usize>,
    pub costs: RangeInclusive<u64>,
    /// Budget is drawn between the largest cost and this many times it.
    pub budget_factor: u64,
    /// Give projects distinct integer coordinates in a square of this side.
    pub grid: Option<i64>,
}

impl Default for SuiteParams {
    fn default() -> Self {
        SuiteParams {
            projects: 2..=6,
            agents: 1..=4,
            costs: 1..=6,
            budget_factor: 3,
            grid: None,
        }
    }
}

impl fmt::Display for SuiteParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "projects {}..={}, agents {}..={}, costs {}..={}, budget up to {}x max cost",
            self.projects.start(),
            self.projects.end(),
            self.agents.start(),
            self.agents.end(),
            self.costs.start(),
            self.costs.end(),
            self.budget_factor
        )?;
        if let Some(g) = self.grid {
            write!(f, ", coordinates on a {g}x{g} grid")?;
        }
        Ok(())
    }
}

pub fn random_instance(rng: &mut SuiteRng, params: &SuiteParams) -> Instance {
    let m = rng.gen_range(params.projects.clone());
    let costs: Vec<u64> = (0..m)
        .map(|_| rng.gen_range(params.costs.clone()))
        .collect();
    let max = costs.iter().copied().max().unwrap_or(1);
    let budget = rng.gen_range(max..=max * params.budget_factor.max(1));
    let mut points = Vec::new();
    if let Some(side) = params.grid {
        let mut cells: Vec<(i64, i64)> = (0..side)
            .flat_map(|x| (0..side).map(move |y| (x, y)))
            .collect();
        cells.shuffle(rng);
        points = cells.into_iter().take(m).collect();
        assert_eq!(points.len(), m, "grid too small for the project count");
    }
    let projects = costs
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let p = Project::new(pid(i as u32 + 1), c);
            match points.get(i) {
                Some(&(x, y)) => p.with_coords(vec![x as f64, y as f64]),
                None => p,
            }
        })
        .collect();
    Instance::new(projects, budget).expect("generated instances are valid")
}

/// Each member of `universe` independently with probability 1/2.
pub fn random_subset(rng: &mut SuiteRng, universe: ProjectSet) -> ProjectSet {
    ProjectSet::from_bits(rng.gen::<u64>()).intersection(universe)
}

/// A nonempty random subset (empty only when `universe` is).
pub fn random_nonempty_subset(rng: &mut SuiteRng, universe: ProjectSet) -> ProjectSet {
    if universe.is_empty() {
        return universe;
    }
    loop {
        let s = random_subset(rng, universe);
        if !s.is_empty() {
            return s;
        }
    }
}

pub fn random_order(rng: &mut SuiteRng, instance: &Instance) -> PreferenceOrder {
    let mut ranking: Vec<usize> = (0..instance.len()).collect();
    ranking.shuffle(rng);
    PreferenceOrder::from_positions(ranking)
}

pub fn random_agent_count(rng: &mut SuiteRng, params: &SuiteParams) -> usize {
    rng.gen_range(params.agents.clone())
}

/// An instance with a profile of nonempty proposals.
pub fn random_shortlisting_case(
    rng: &mut SuiteRng,
    params: &SuiteParams,
) -> (Instance, ShortlistingProfile) {
    let instance = random_instance(rng, params);
    let n = random_agent_count(rng, params);
    let proposals = (0..n)
        .map(|_| random_nonempty_subset(rng, instance.all()))
        .collect();
    (instance, ShortlistingProfile::new(proposals))
}

/// An instance, a shortlist, arbitrary ballots and preference orders.
pub fn random_allocation_case(
    rng: &mut SuiteRng,
    params: &SuiteParams,
) -> (Instance, ProjectSet, ApprovalProfile, Vec<PreferenceOrder>) {
    let instance = random_instance(rng, params);
    let shortlist = random_nonempty_subset(rng, instance.all());
    let n = random_agent_count(rng, params);
    let ballots = (0..n).map(|_| random_subset(rng, shortlist)).collect();
    let orders = (0..n).map(|_| random_order(rng, &instance)).collect();
    (instance, shortlist, ApprovalProfile::new(ballots), orders)
}

/// Every cost vector of length `m` over `values`.
pub fn cost_vectors(m: usize, values: &[u64]) -> Vec<Vec<u64>> {
    let mut out = vec![vec![]];
    for _ in 0..m {
        out = out
            .into_iter()
            .flat_map(|v| {
                values.iter().map(move |&c| {
                    let mut w = v.clone();
                    w.push(c);
                    w
                })
            })
            .collect();
    }
    out
}

/// Every ordering of `0..m`.
pub fn permutations(m: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, m: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == m {
            out.push(prefix.clone());
            return;
        }
        for x in 0..m {
            if !prefix.contains(&x) {
                prefix.push(x);
                go(prefix, m, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), m, &mut out);
    out
}
