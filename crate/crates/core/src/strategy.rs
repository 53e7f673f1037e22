//! First-stage strategic analysis: best responses in the allocation stage,
//! manipulation checks on proposals and first-stage strategyproofness.

use std::collections::HashMap;
use std::rc::Rc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::allocation::{AllocationRule, ApprovalProfile};
use crate::error::{Error, Result};
use crate::model::{AllocationInstance, Instance, ProjectSet};
use crate::preferences::{Agent, PreferenceModel};
use crate::shortlisting::{ShortlistingProfile, ShortlistingRule};
use crate::tiebreak::tiebreak_sets;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ManipulationMode {
    Pessimistic,
    Optimistic,
    Anticipative,
}

impl ManipulationMode {
    pub const ALL: [ManipulationMode; 3] = [
        ManipulationMode::Pessimistic,
        ManipulationMode::Optimistic,
        ManipulationMode::Anticipative,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ManipulationMode::Pessimistic => "pessimistic",
            ManipulationMode::Optimistic => "optimistic",
            ManipulationMode::Anticipative => "anticipative",
        }
    }

    pub fn letter(self) -> char {
        match self {
            ManipulationMode::Pessimistic => 'P',
            ManipulationMode::Optimistic => 'O',
            ManipulationMode::Anticipative => 'A',
        }
    }
}

/// Whether a manipulator may only propose projects she is aware of, or
/// also projects proposed by others.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FsspVariant {
    Restricted,
    Unrestricted,
}

impl FsspVariant {
    pub const ALL: [FsspVariant; 2] = [FsspVariant::Restricted, FsspVariant::Unrestricted];

    pub fn letter(self) -> char {
        match self {
            FsspVariant::Restricted => 'R',
            FsspVariant::Unrestricted => 'U',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Successful,
    Unsuccessful,
    Unknown,
}

/// Caps and sampling settings for the strategic searches.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchLimits {
    /// Largest shortlist whose ballots are enumerated for a best response.
    pub ballot_cap: usize,
    /// Largest number of profiles of the other agents enumerated per shortlist.
    pub profile_cap: u64,
    /// Largest set of candidate proposals enumerated for a deviation search.
    pub deviation_cap: usize,
    /// Fall back to sampling when `profile_cap` is exceeded.
    pub sampling: bool,
    pub samples: u64,
    pub seed: u64,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            ballot_cap: 12,
            profile_cap: 1 << 16,
            deviation_cap: 12,
            sampling: true,
            samples: 512,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BestResponse {
    pub ballot: ProjectSet,
    pub outcome: ProjectSet,
}

/// The agent's best response to `profile`: among the outcomes she can
/// reach by changing her ballot, the best ones for `ideal` are tie-broken
/// canonically, and the canonical ballot reaching that outcome is returned.
pub fn best_response(
    rule: &dyn AllocationRule,
    instance: &AllocationInstance<'_>,
    profile: &ApprovalProfile,
    agent: usize,
    ideal: ProjectSet,
    model: PreferenceModel,
    cap: usize,
) -> Result<BestResponse> {
    if agent >= profile.len() {
        return Err(Error::invalid("agent out of range"));
    }
    Error::check_cap(
        "shortlist size for best responses",
        instance.shortlist.len() as u64,
        cap as u64,
    )?;
    let mut reached: Vec<(ProjectSet, ProjectSet)> = Vec::new();
    let mut best_value = 0u64;
    for ballot in instance.shortlist.subsets() {
        let outcome = rule.allocate(instance, &profile.with_ballot(agent, ballot))?;
        let v = model.value(instance.universe, ideal, outcome);
        if reached.is_empty() || v > best_value {
            best_value = v;
            reached.clear();
        }
        if v == best_value {
            reached.push((ballot, outcome));
        }
    }
    let outcome = tiebreak_sets(reached.iter().map(|&(_, o)| o)).expect("at least one ballot");
    let ballot = tiebreak_sets(
        reached
            .iter()
            .filter(|&&(_, o)| o == outcome)
            .map(|&(b, _)| b),
    )
    .expect("reached");
    Ok(BestResponse { ballot, outcome })
}

/// The outcome once the agent replaces her ballot by her best response.
pub fn f_star(
    rule: &dyn AllocationRule,
    instance: &AllocationInstance<'_>,
    profile: &ApprovalProfile,
    agent: usize,
    ideal: ProjectSet,
    model: PreferenceModel,
    cap: usize,
) -> Result<ProjectSet> {
    best_response(rule, instance, profile, agent, ideal, model, cap).map(|r| r.outcome)
}

/// A shortlisting rule, an allocation rule and the agents taking part.
pub struct StageGame<'a> {
    pub instance: &'a Instance,
    pub shortlisting: &'a dyn ShortlistingRule,
    pub allocation: &'a dyn AllocationRule,
    pub model: PreferenceModel,
    pub agents: Vec<Agent>,
}

impl<'a> StageGame<'a> {
    /// Everyone proposes her ideal set among the projects she knows.
    pub fn truthful_proposals(&self) -> ShortlistingProfile {
        ShortlistingProfile::new(
            self.agents
                .iter()
                .map(|a| a.ideal(self.instance, a.awareness))
                .collect(),
        )
    }

    pub fn strategist(&self, limits: SearchLimits) -> Strategist<'a> {
        Strategist::new(
            self.instance,
            self.shortlisting,
            self.allocation,
            self.model,
            limits,
        )
    }
}

/// Everything needed to replay a manipulation verdict.
#[derive(Clone, Debug, PartialEq)]
pub struct ManipulationWitness {
    pub agent: usize,
    pub mode: ManipulationMode,
    /// The profile before the deviation.
    pub proposals: ShortlistingProfile,
    pub deviation: ProjectSet,
    pub shortlist: ProjectSet,
    pub manipulated_shortlist: ProjectSet,
    /// The agent's ideal set within the union of both shortlists.
    pub comparison_ideal: ProjectSet,
    /// The compared second-stage profiles, when a pair is singled out.
    pub profile: Option<ApprovalProfile>,
    pub manipulated_profile: Option<ApprovalProfile>,
    pub outcome: Option<ProjectSet>,
    pub manipulated_outcome: Option<ProjectSet>,
}

impl ManipulationWitness {
    pub fn truthful_proposal(&self) -> ProjectSet {
        self.proposals.proposals()[self.agent]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ManipulationReport {
    pub verdict: Verdict,
    /// False when some second-stage profiles were sampled.
    pub exact: bool,
    pub witness: ManipulationWitness,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FsspVerdict {
    Holds,
    Violated,
    Unknown,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FsspReport {
    pub variant: FsspVariant,
    pub mode: ManipulationMode,
    pub verdict: FsspVerdict,
    pub exact: bool,
    pub deviations_checked: u64,
    pub witness: Option<ManipulationWitness>,
}

/// The distinct best-response outcomes over all (or sampled) profiles of
/// the other agents, each with the first profile producing it.
struct OutcomeSpace {
    entries: Vec<(ProjectSet, ApprovalProfile)>,
    exact: bool,
}

type SpaceKey = (usize, usize, ProjectSet, ProjectSet);

/// Runs manipulation checks for one instance, pair of rules and
/// preference model, caching best-response outcome spaces across calls.
/// Agents and proposals are passed per call, so one strategist can serve
/// many profiles over the same instance.
pub struct Strategist<'a> {
    instance: &'a Instance,
    shortlisting: &'a dyn ShortlistingRule,
    allocation: &'a dyn AllocationRule,
    model: PreferenceModel,
    limits: SearchLimits,
    cache: HashMap<SpaceKey, Rc<OutcomeSpace>>,
}

impl<'a> Strategist<'a> {
    pub fn new(
        instance: &'a Instance,
        shortlisting: &'a dyn ShortlistingRule,
        allocation: &'a dyn AllocationRule,
        model: PreferenceModel,
        limits: SearchLimits,
    ) -> Self {
        Strategist {
            instance,
            shortlisting,
            allocation,
            model,
            limits,
            cache: HashMap::new(),
        }
    }

    pub fn limits(&self) -> &SearchLimits {
        &self.limits
    }

    fn value(&self, ideal: ProjectSet, allocation: ProjectSet) -> u64 {
        self.model.value(self.instance, ideal, allocation)
    }

    /// Outcome after the agent's best response, every other agent voting
    /// for her ideal set within `shortlist`.
    fn anticipated(
        &self,
        agents: &[Agent],
        agent: usize,
        shortlist: ProjectSet,
    ) -> Result<(ProjectSet, ApprovalProfile)> {
        let inst = AllocationInstance::new(self.instance, shortlist)?;
        let profile = ApprovalProfile::new(
            agents
                .iter()
                .map(|a| a.ideal(self.instance, shortlist))
                .collect(),
        );
        let ideal = profile.ballots()[agent];
        let outcome = f_star(
            self.allocation,
            &inst,
            &profile,
            agent,
            ideal,
            self.model,
            self.limits.ballot_cap,
        )?;
        Ok((outcome, profile))
    }

    fn outcome_space(
        &mut self,
        agents: &[Agent],
        agent: usize,
        shortlist: ProjectSet,
    ) -> Result<Rc<OutcomeSpace>> {
        let n = agents.len();
        let ideal = agents[agent].ideal(self.instance, shortlist);
        let key = (n, agent, shortlist, ideal);
        if let Some(space) = self.cache.get(&key) {
            return Ok(space.clone());
        }
        let inst = AllocationInstance::new(self.instance, shortlist)?;
        let cap = self.limits.ballot_cap;
        Error::check_cap(
            "shortlist size for best responses",
            shortlist.len() as u64,
            cap as u64,
        )?;
        let ballots: Vec<ProjectSet> = shortlist.subsets().collect();
        let count = (ballots.len() as u64)
            .checked_pow(n as u32 - 1)
            .unwrap_or(u64::MAX);
        let mut entries: Vec<(ProjectSet, ApprovalProfile)> = Vec::new();
        let mut record = |profile: ApprovalProfile| -> Result<()> {
            let outcome = f_star(
                self.allocation,
                &inst,
                &profile,
                agent,
                ideal,
                self.model,
                cap,
            )?;
            if !entries.iter().any(|(o, _)| *o == outcome) {
                entries.push((outcome, profile));
            }
            Ok(())
        };
        let exact = count <= self.limits.profile_cap;
        if exact {
            let others: Vec<usize> = (0..n).filter(|&j| j != agent).collect();
            let mut digits = vec![0usize; others.len()];
            loop {
                let mut ballots_now = vec![ideal; n];
                for (d, &j) in digits.iter().zip(&others) {
                    ballots_now[j] = ballots[*d];
                }
                record(ApprovalProfile::new(ballots_now))?;
                let mut k = 0;
                while k < digits.len() {
                    digits[k] += 1;
                    if digits[k] < ballots.len() {
                        break;
                    }
                    digits[k] = 0;
                    k += 1;
                }
                if k == digits.len() {
                    break;
                }
            }
        } else if self.limits.sampling {
            let mix = shortlist
                .bits()
                .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                .wrapping_add(agent as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(self.limits.seed ^ mix);
            for _ in 0..self.limits.samples {
                let profile = ApprovalProfile::new(
                    (0..n)
                        .map(|j| {
                            if j == agent {
                                ideal
                            } else {
                                ProjectSet::from_bits(rng.gen::<u64>()).intersection(shortlist)
                            }
                        })
                        .collect(),
                );
                record(profile)?;
            }
        } else {
            return Err(Error::ResourceLimit {
                what: "number of second-stage profiles",
                actual: count,
                cap: self.limits.profile_cap,
            });
        }
        let space = Rc::new(OutcomeSpace { entries, exact });
        self.cache.insert(key, space.clone());
        Ok(space)
    }

    fn check_inputs(
        &self,
        agents: &[Agent],
        proposals: &ShortlistingProfile,
        agent: usize,
    ) -> Result<()> {
        if agents.is_empty() || agents.len() != proposals.len() {
            return Err(Error::invalid(
                "need one proposal per agent and at least one agent",
            ));
        }
        if agent >= agents.len() {
            return Err(Error::invalid("agent out of range"));
        }
        let all = self.instance.all();
        for a in agents {
            if a.order.positions().len() != self.instance.len() || !a.awareness.is_subset(all) {
                return Err(Error::invalid(
                    "agent preferences do not match the instance",
                ));
            }
        }
        if proposals.proposals().iter().any(|p| !p.is_subset(all)) {
            return Err(Error::invalid("proposal outside the universe"));
        }
        Ok(())
    }

    /// Is proposing `deviation` instead of `proposals[agent]` a successful
    /// manipulation for `agent`?
    pub fn check_manipulation(
        &mut self,
        agents: &[Agent],
        proposals: &ShortlistingProfile,
        agent: usize,
        deviation: ProjectSet,
        mode: ManipulationMode,
    ) -> Result<ManipulationReport> {
        self.check_inputs(agents, proposals, agent)?;
        if !deviation.is_subset(self.instance.all()) {
            return Err(Error::invalid("deviation outside the universe"));
        }
        let shortlist = self.shortlisting.shortlist(self.instance, proposals)?;
        let manipulated_shortlist = self
            .shortlisting
            .shortlist(self.instance, &proposals.with_proposal(agent, deviation))?;
        let comparison_ideal =
            agents[agent].ideal(self.instance, shortlist.union(manipulated_shortlist));
        let mut witness = ManipulationWitness {
            agent,
            mode,
            proposals: proposals.clone(),
            deviation,
            shortlist,
            manipulated_shortlist,
            comparison_ideal,
            profile: None,
            manipulated_profile: None,
            outcome: None,
            manipulated_outcome: None,
        };
        let pair = |w: &mut ManipulationWitness,
                    a: &(ProjectSet, ApprovalProfile),
                    b: &(ProjectSet, ApprovalProfile)| {
            w.outcome = Some(a.0);
            w.profile = Some(a.1.clone());
            w.manipulated_outcome = Some(b.0);
            w.manipulated_profile = Some(b.1.clone());
        };

        if mode == ManipulationMode::Anticipative {
            let before = self.anticipated(agents, agent, shortlist)?;
            let after = self.anticipated(agents, agent, manipulated_shortlist)?;
            let success =
                self.value(comparison_ideal, after.0) > self.value(comparison_ideal, before.0);
            pair(&mut witness, &before, &after);
            return Ok(ManipulationReport {
                verdict: if success {
                    Verdict::Successful
                } else {
                    Verdict::Unsuccessful
                },
                exact: true,
                witness,
            });
        }

        let space = self.outcome_space(agents, agent, shortlist)?;
        let manipulated = self.outcome_space(agents, agent, manipulated_shortlist)?;
        let exact = space.exact && manipulated.exact;
        let val = |e: &(ProjectSet, ApprovalProfile)| self.value(comparison_ideal, e.0);
        // First entries attaining the extreme values.
        let argmin = |s: &OutcomeSpace| {
            s.entries
                .iter()
                .min_by_key(|e| val(e))
                .expect("nonempty")
                .clone()
        };
        let argmax = |s: &OutcomeSpace| {
            s.entries
                .iter()
                .rev()
                .max_by_key(|e| val(e))
                .expect("nonempty")
                .clone()
        };
        let (lo, hi) = (argmin(&space), argmax(&space));
        let (lo2, hi2) = (argmin(&manipulated), argmax(&manipulated));
        let strict_pair = val(&hi2) > val(&lo);
        let verdict = match mode {
            ManipulationMode::Pessimistic => {
                if val(&lo2) < val(&hi) {
                    pair(&mut witness, &hi, &lo2);
                    Verdict::Unsuccessful
                } else if !exact {
                    pair(&mut witness, &lo, &hi2);
                    Verdict::Unknown
                } else {
                    pair(&mut witness, &lo, &hi2);
                    if strict_pair {
                        Verdict::Successful
                    } else {
                        Verdict::Unsuccessful
                    }
                }
            }
            ManipulationMode::Optimistic => {
                pair(&mut witness, &lo, &hi2);
                if strict_pair {
                    Verdict::Successful
                } else if exact {
                    Verdict::Unsuccessful
                } else {
                    Verdict::Unknown
                }
            }
            ManipulationMode::Anticipative => unreachable!(),
        };
        Ok(ManipulationReport {
            verdict,
            exact,
            witness,
        })
    }

    /// Searches every admissible deviation of the selected agents (all
    /// agents when `only` is `None`) for a successful manipulation.
    ///
    /// Each agent's own entry in `proposals` is replaced by her truthful
    /// proposal for the variant; the other entries are kept and must lie
    /// within their proposers' awareness sets.
    pub fn check_fssp(
        &mut self,
        agents: &[Agent],
        proposals: &ShortlistingProfile,
        variant: FsspVariant,
        mode: ManipulationMode,
        only: Option<&[usize]>,
    ) -> Result<FsspReport> {
        self.check_inputs(agents, proposals, 0)?;
        for (a, p) in agents.iter().zip(proposals.proposals()) {
            if !p.is_subset(a.awareness) {
                return Err(Error::invalid(
                    "a proposal is not within its agent's awareness set",
                ));
            }
        }
        let selected: Vec<usize> = match only {
            Some(list) => {
                if list.iter().any(|&i| i >= agents.len()) {
                    return Err(Error::invalid("agent out of range"));
                }
                list.to_vec()
            }
            None => (0..agents.len()).collect(),
        };
        let mut exact = true;
        let mut unknown = false;
        let mut checked = 0u64;
        for i in selected {
            let others = proposals
                .proposals()
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .fold(ProjectSet::EMPTY, |acc, (_, &p)| acc.union(p));
            let space = match variant {
                FsspVariant::Restricted => agents[i].awareness,
                FsspVariant::Unrestricted => agents[i].awareness.union(others),
            };
            Error::check_cap(
                "deviation space size",
                space.len() as u64,
                self.limits.deviation_cap as u64,
            )?;
            let baseline = agents[i].ideal(self.instance, space);
            let base = proposals.with_proposal(i, baseline);
            for deviation in space.subsets().filter(|&d| d != baseline) {
                checked += 1;
                let report = self.check_manipulation(agents, &base, i, deviation, mode)?;
                exact &= report.exact;
                match report.verdict {
                    Verdict::Successful => {
                        return Ok(FsspReport {
                            variant,
                            mode,
                            verdict: FsspVerdict::Violated,
                            exact,
                            deviations_checked: checked,
                            witness: Some(report.witness),
                        })
                    }
                    Verdict::Unknown => unknown = true,
                    Verdict::Unsuccessful => {}
                }
            }
        }
        Ok(FsspReport {
            variant,
            mode,
            verdict: if unknown {
                FsspVerdict::Unknown
            } else {
                FsspVerdict::Holds
            },
            exact,
            deviations_checked: checked,
            witness: None,
        })
    }

    /// All six variant/mode cells for one profile.
    pub fn fssp_table(
        &mut self,
        agents: &[Agent],
        proposals: &ShortlistingProfile,
    ) -> Result<FsspTable> {
        let mut cells = Vec::new();
        for variant in FsspVariant::ALL {
            for mode in ManipulationMode::ALL {
                let r = self.check_fssp(agents, proposals, variant, mode, None)?;
                cells.push((variant, mode, r.verdict));
            }
        }
        let covers = (0..agents.len()).all(|i| {
            proposals
                .proposals()
                .iter()
                .enumerate()
                .all(|(j, &p)| j == i || p.is_subset(agents[i].awareness))
        });
        Ok(FsspTable {
            cells,
            awareness_covers_proposals: covers,
        })
    }
}

/// FSSP verdicts of one fixture in every variant/mode cell.
#[derive(Clone, Debug, PartialEq)]
pub struct FsspTable {
    pub cells: Vec<(FsspVariant, ManipulationMode, FsspVerdict)>,
    /// Every agent already knows every project the others propose; then
    /// the restricted and unrestricted checks coincide.
    pub awareness_covers_proposals: bool,
}

impl FsspTable {
    pub fn get(&self, variant: FsspVariant, mode: ManipulationMode) -> Option<FsspVerdict> {
        self.cells
            .iter()
            .find(|&&(v, m, _)| v == variant && m == mode)
            .map(|&(_, _, r)| r)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ImplicationReport {
    pub checked: Vec<String>,
    pub violations: Vec<String>,
}

/// Checks a verdict table against the implications between the FSSP
/// notions: optimistic FSSP implies anticipative and pessimistic FSSP in
/// each variant, and, when the restricted and unrestricted deviation
/// spaces coincide, restricted FSSP implies unrestricted FSSP. Cells with
/// unknown verdicts are skipped.
pub fn verify_fssp_implications(table: &FsspTable) -> ImplicationReport {
    let mut report = ImplicationReport::default();
    let mut implies = |from: (FsspVariant, ManipulationMode),
                       to: (FsspVariant, ManipulationMode)| {
        let name =
            |(v, m): (FsspVariant, ManipulationMode)| format!("{}-FSSP-{}", v.letter(), m.letter());
        let (a, b) = (table.get(from.0, from.1), table.get(to.0, to.1));
        if let (Some(a), Some(b)) = (a, b) {
            if a == FsspVerdict::Unknown || b == FsspVerdict::Unknown {
                return;
            }
            let line = format!("{} => {}", name(from), name(to));
            if a == FsspVerdict::Holds && b == FsspVerdict::Violated {
                report.violations.push(line.clone());
            }
            report.checked.push(line);
        }
    };
    for v in FsspVariant::ALL {
        implies(
            (v, ManipulationMode::Optimistic),
            (v, ManipulationMode::Anticipative),
        );
        implies(
            (v, ManipulationMode::Optimistic),
            (v, ManipulationMode::Pessimistic),
        );
    }
    if table.awareness_covers_proposals {
        for m in ManipulationMode::ALL {
            implies((FsspVariant::Restricted, m), (FsspVariant::Unrestricted, m));
        }
    }
    report
}
