//! Second-stage allocation rules over approval ballots.

use std::fmt;

use crate::error::{Error, Result};
use crate::greedy::greedy;
use crate::model::{AllocationInstance, ProjectSet};
use crate::tiebreak::{order_by_score_desc, tiebreak_sets};

/// One approval ballot per agent.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ApprovalProfile(pub Vec<ProjectSet>);

impl ApprovalProfile {
    pub fn new(ballots: Vec<ProjectSet>) -> Self {
        ApprovalProfile(ballots)
    }

    pub fn ballots(&self) -> &[ProjectSet] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The profile with agent `agent`'s ballot replaced.
    pub fn with_ballot(&self, agent: usize, ballot: ProjectSet) -> Self {
        let mut ballots = self.0.clone();
        ballots[agent] = ballot;
        ApprovalProfile(ballots)
    }
}

/// Approval score `n_p` per universe position (zero outside the shortlist).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApprovalScores(Vec<u64>);

impl ApprovalScores {
    pub fn get(&self, pos: usize) -> u64 {
        self.0[pos]
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn total(&self, set: ProjectSet) -> u64 {
        set.iter().map(|p| self.0[p]).sum()
    }
}

pub fn approval_scores(
    instance: &AllocationInstance<'_>,
    profile: &ApprovalProfile,
) -> Result<ApprovalScores> {
    let mut scores = vec![0u64; instance.universe.len()];
    for (agent, ballot) in profile.ballots().iter().enumerate() {
        if !ballot.is_subset(instance.shortlist) {
            return Err(Error::invalid(format!(
                "ballot of agent {} approves projects outside the shortlist",
                agent + 1
            )));
        }
        for pos in ballot.iter() {
            scores[pos] += 1;
        }
    }
    Ok(ApprovalScores(scores))
}

/// Maps an allocation instance and an approval profile to a feasible allocation.
pub trait AllocationRule: Send + Sync {
    fn name(&self) -> String;

    fn allocate(
        &self,
        instance: &AllocationInstance<'_>,
        profile: &ApprovalProfile,
    ) -> Result<ProjectSet>;
}

/// Greedy selection by descending approval score, ties to the lower index.
#[derive(Clone, Copy, Debug, Default)]
pub struct GreedyApproval;

impl AllocationRule for GreedyApproval {
    fn name(&self) -> String {
        "greedy-approval".into()
    }

    fn allocate(
        &self,
        instance: &AllocationInstance<'_>,
        profile: &ApprovalProfile,
    ) -> Result<ProjectSet> {
        let scores = approval_scores(instance, profile)?;
        let order = order_by_score_desc(instance.shortlist, |p| scores.get(p));
        Ok(greedy(instance.universe, &order, instance.budget()))
    }
}

/// How ties between equally good allocations are broken.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum TieBreakPolicy {
    /// The canonical rule on families of sets.
    #[default]
    Canonical,
    /// The listed allocations first, in order; anything unlisted after
    /// them, by the canonical rule.
    Priority(Vec<ProjectSet>),
}

impl TieBreakPolicy {
    pub fn priority(list: Vec<ProjectSet>) -> Result<Self> {
        for (i, a) in list.iter().enumerate() {
            if list[..i].contains(a) {
                return Err(Error::invalid(
                    "priority list contains a duplicate allocation",
                ));
            }
        }
        Ok(TieBreakPolicy::Priority(list))
    }
}

/// Feasible allocation of maximum total approval.
#[derive(Clone, Debug)]
pub struct ApprovalMaximising {
    pub policy: TieBreakPolicy,
    /// Maximum number of maximisers enumerated under a priority policy.
    pub maximizer_cap: u64,
}

impl Default for ApprovalMaximising {
    fn default() -> Self {
        ApprovalMaximising::canonical()
    }
}

impl ApprovalMaximising {
    pub const DEFAULT_MAXIMIZER_CAP: u64 = 10_000;

    pub fn canonical() -> Self {
        ApprovalMaximising {
            policy: TieBreakPolicy::Canonical,
            maximizer_cap: Self::DEFAULT_MAXIMIZER_CAP,
        }
    }

    pub fn with_policy(policy: TieBreakPolicy) -> Self {
        ApprovalMaximising {
            policy,
            maximizer_cap: Self::DEFAULT_MAXIMIZER_CAP,
        }
    }
}

impl fmt::Display for ApprovalMaximising {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.policy {
            TieBreakPolicy::Canonical => write!(f, "approval-maximising"),
            TieBreakPolicy::Priority(_) => write!(f, "approval-maximising[priority]"),
        }
    }
}

impl AllocationRule for ApprovalMaximising {
    fn name(&self) -> String {
        self.to_string()
    }

    fn allocate(
        &self,
        instance: &AllocationInstance<'_>,
        profile: &ApprovalProfile,
    ) -> Result<ProjectSet> {
        let scores = approval_scores(instance, profile)?;
        let table = SuffixKnapsack::new(instance, scores.as_slice())?;
        match &self.policy {
            TieBreakPolicy::Canonical => Ok(table.canonical_maximiser()),
            TieBreakPolicy::Priority(list) => {
                let optimum = table.optimum();
                let budget = instance.budget();
                if let Some(&first) = list.iter().find(|a| {
                    a.is_subset(instance.shortlist)
                        && instance.total_cost(**a) <= budget
                        && scores.total(**a) == optimum
                }) {
                    return Ok(first);
                }
                let all = table.all_maximisers(self.maximizer_cap)?;
                Ok(tiebreak_sets(all).expect("at least one maximiser exists"))
            }
        }
    }
}

/// Exact knapsack value oracle over the shortlist.
///
/// `best[j][r]` is the largest total score of a subset of the shortlisted
/// projects at positions `order[j..]` whose cost is at most `r`.
struct SuffixKnapsack<'a> {
    instance: &'a AllocationInstance<'a>,
    scores: &'a [u64],
    order: Vec<usize>,
    best: Vec<Vec<u64>>,
}

impl<'a> SuffixKnapsack<'a> {
    const MAX_CELLS: u64 = 1 << 26;

    fn new(instance: &'a AllocationInstance<'a>, scores: &'a [u64]) -> Result<Self> {
        let order: Vec<usize> = instance.shortlist.iter().collect();
        let cells = (instance.budget() + 1).saturating_mul(order.len() as u64 + 1);
        Error::check_cap("knapsack table size", cells, Self::MAX_CELLS)?;
        let budget = instance.budget() as usize;
        let mut best = vec![vec![0u64; budget + 1]; order.len() + 1];
        for j in (0..order.len()).rev() {
            let cost = instance.cost(order[j]) as usize;
            let score = scores[order[j]];
            let (head, tail) = best.split_at_mut(j + 1);
            let next = &tail[0];
            let row = &mut head[j];
            for r in 0..=budget {
                let skip = next[r];
                row[r] = if cost <= r {
                    skip.max(score + next[r - cost])
                } else {
                    skip
                };
            }
        }
        Ok(SuffixKnapsack {
            instance,
            scores,
            order,
            best,
        })
    }

    fn optimum(&self) -> u64 {
        self.best[0][self.instance.budget() as usize]
    }

    /// The maximiser preferred by the canonical rule: scanning by ascending
    /// index, include a project whenever some optimal completion of the
    /// decisions so far includes it.
    fn canonical_maximiser(&self) -> ProjectSet {
        let mut residual = self.instance.budget() as usize;
        let mut remaining = self.optimum();
        let mut chosen = ProjectSet::EMPTY;
        for (j, &pos) in self.order.iter().enumerate() {
            let cost = self.instance.cost(pos) as usize;
            let score = self.scores[pos];
            if cost <= residual && score + self.best[j + 1][residual - cost] == remaining {
                chosen.insert(pos);
                residual -= cost;
                remaining -= score;
            }
        }
        debug_assert_eq!(remaining, 0);
        chosen
    }

    fn all_maximisers(&self, cap: u64) -> Result<Vec<ProjectSet>> {
        let mut out = Vec::new();
        self.collect(
            0,
            self.instance.budget() as usize,
            self.optimum(),
            ProjectSet::EMPTY,
            cap,
            &mut out,
        )?;
        Ok(out)
    }

    fn collect(
        &self,
        j: usize,
        residual: usize,
        remaining: u64,
        chosen: ProjectSet,
        cap: u64,
        out: &mut Vec<ProjectSet>,
    ) -> Result<()> {
        if j == self.order.len() {
            out.push(chosen);
            return Error::check_cap("number of maximising allocations", out.len() as u64, cap);
        }
        let pos = self.order[j];
        let cost = self.instance.cost(pos) as usize;
        let score = self.scores[pos];
        if cost <= residual && score + self.best[j + 1][residual - cost] == remaining {
            self.collect(
                j + 1,
                residual - cost,
                remaining - score,
                chosen.with(pos),
                cap,
                out,
            )?;
        }
        if self.best[j + 1][residual] == remaining {
            self.collect(j + 1, residual, remaining, chosen, cap, out)?;
        }
        Ok(())
    }
}
