use std::fmt;

use num_rational::Ratio;

use super::{ShortlistingProfile, ShortlistingRule};
use crate::error::{Error, Result};
use crate::model::{Instance, ProjectSet};

/// Exact representation score `sum_i sum_{l=0}^{|P_i ∩ P|} n^{-l}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RepresentationScore(Ratio<u128>);

impl RepresentationScore {
    pub fn numer(&self) -> u128 {
        *self.0.numer()
    }

    pub fn denom(&self) -> u128 {
        *self.0.denom()
    }

    pub fn as_ratio(&self) -> Ratio<u128> {
        self.0
    }
}

impl fmt::Display for RepresentationScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn overflow() -> Error {
    Error::ResourceLimit {
        what: "representation score magnitude (bits)",
        actual: 129,
        cap: 128,
    }
}

/// Scores scaled by `n^depth`, where `depth` bounds every agent's count.
///
/// `weight[t]` is the scaled contribution of an agent with `t` shortlisted
/// proposals; `marginal[t]` the gain of going from `t` to `t + 1`.
struct ScaledWeights {
    weight: Vec<u128>,
    marginal: Vec<u128>,
    scale: u128,
}

impl ScaledWeights {
    fn new(agents: usize, depth: usize) -> Result<Self> {
        let n = agents as u128;
        // marginal[t] = n^(depth - t - 1) for t < depth
        let mut powers = vec![1u128; depth + 1];
        for l in 1..=depth {
            powers[l] = powers[l - 1].checked_mul(n).ok_or_else(overflow)?;
        }
        let scale = powers[depth];
        let mut weight = Vec::with_capacity(depth + 1);
        let mut acc = 0u128;
        for t in 0..=depth {
            acc = acc.checked_add(powers[depth - t]).ok_or_else(overflow)?;
            weight.push(acc);
        }
        // Total over all agents must fit as well.
        weight[depth].checked_mul(n.max(1)).ok_or_else(overflow)?;
        let marginal = (0..depth).map(|t| powers[depth - t - 1]).collect();
        Ok(ScaledWeights {
            weight,
            marginal,
            scale,
        })
    }
}

pub fn representation_score(
    shortlist: ProjectSet,
    profile: &ShortlistingProfile,
) -> Result<RepresentationScore> {
    let n = profile.len();
    if n == 0 {
        return Ok(RepresentationScore(Ratio::from_integer(0)));
    }
    let depth = profile
        .proposals()
        .iter()
        .map(|p| p.len())
        .max()
        .unwrap_or(0);
    let weights = ScaledWeights::new(n, depth)?;
    let total: u128 = profile
        .proposals()
        .iter()
        .map(|p| weights.weight[p.intersection(shortlist).len()])
        .sum();
    Ok(RepresentationScore(Ratio::new(total, weights.scale)))
}

/// The k-equal-representation rule: a budget-`kB` subset of the proposed
/// projects maximising the representation score, ties broken canonically.
#[derive(Clone, Copy, Debug)]
pub struct EqualRepresentation {
    pub k: u64,
    /// Largest number of proposed projects searched exactly.
    pub cap: usize,
}

impl EqualRepresentation {
    pub const DEFAULT_CAP: usize = 20;

    pub fn new(k: u64) -> Self {
        EqualRepresentation {
            k,
            cap: Self::DEFAULT_CAP,
        }
    }
}

impl ShortlistingRule for EqualRepresentation {
    fn name(&self) -> String {
        format!("{}-equal-representation", self.k)
    }

    fn shortlist(&self, instance: &Instance, profile: &ShortlistingProfile) -> Result<ProjectSet> {
        if self.k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        let union = profile.union();
        Error::check_cap(
            "number of proposed projects",
            union.len() as u64,
            self.cap as u64,
        )?;
        if profile.is_empty() || union.is_empty() {
            return Ok(ProjectSet::EMPTY);
        }
        let depth = profile
            .proposals()
            .iter()
            .map(|p| p.len())
            .max()
            .unwrap_or(0);
        let weights = ScaledWeights::new(profile.len(), depth)?;
        let limit = self
            .k
            .checked_mul(instance.budget())
            .ok_or_else(|| Error::invalid("k * budget overflows"))?;

        let candidates: Vec<usize> = union.iter().collect();
        let proposers: Vec<Vec<usize>> = candidates
            .iter()
            .map(|&pos| {
                profile
                    .proposals()
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| p.contains(pos))
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect();
        let mut search = Search {
            instance,
            candidates: &candidates,
            proposers: &proposers,
            weights: &weights,
            limit,
            counts: vec![0; profile.len()],
            best: None,
        };
        let base = weights.weight[0] * profile.len() as u128;
        search.descend(0, ProjectSet::EMPTY, 0, base);
        Ok(search
            .best
            .expect("the empty shortlist is always reachable")
            .1)
    }
}

/// Include-first depth-first search over candidates in ascending index
/// order. Leaves are met in decreasing canonical tie-break order, so the
/// first leaf attaining the optimum is the tie-broken winner and later
/// leaves only matter when strictly better; the bound prunes on that.
struct Search<'a> {
    instance: &'a Instance,
    candidates: &'a [usize],
    proposers: &'a [Vec<usize>],
    weights: &'a ScaledWeights,
    limit: u64,
    counts: Vec<usize>,
    best: Option<(u128, ProjectSet)>,
}

impl Search<'_> {
    fn gain(&self, j: usize) -> u128 {
        self.proposers[j]
            .iter()
            .map(|&i| self.weights.marginal[self.counts[i]])
            .sum()
    }

    fn optimistic_bound(&self, from: usize, spent: u64, score: u128) -> u128 {
        let residual = self.limit - spent;
        score
            + (from..self.candidates.len())
                .filter(|&j| self.instance.cost(self.candidates[j]) <= residual)
                .map(|j| self.gain(j))
                .sum::<u128>()
    }

    fn descend(&mut self, j: usize, chosen: ProjectSet, spent: u64, score: u128) {
        if let Some((best, _)) = self.best {
            if self.optimistic_bound(j, spent, score) <= best {
                return;
            }
        }
        if j == self.candidates.len() {
            // Reaching here means the bound did not prune, so this is strictly better.
            self.best = Some((score, chosen));
            return;
        }
        let pos = self.candidates[j];
        let cost = self.instance.cost(pos);
        if spent + cost <= self.limit {
            let gain = self.gain(j);
            for &i in &self.proposers[j] {
                self.counts[i] += 1;
            }
            self.descend(j + 1, chosen.with(pos), spent + cost, score + gain);
            for &i in &self.proposers[j] {
                self.counts[i] -= 1;
            }
        }
        self.descend(j + 1, chosen, spent, score);
    }
}
