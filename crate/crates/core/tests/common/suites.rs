//! Exhaustive and seeded suites. Each returns a `SuiteResult` so the same
//! runs back both the topical tests and the acceptance report.

use rand::Rng;
use serde_json::json;

use pbflow::scenario::{instance_document, AgentDoc, Config, Expectation, ScenarioDocument};
use pbflow::shortlisting::{k_median, EqualRepresentation, KMedian, Metric};
use pbflow::strategy::{FsspVariant, FsspVerdict, ManipulationMode, SearchLimits, Strategist};
use pbflow::verification::suite::{self, SuiteParams, SuiteRng};
use pbflow::verification::{
    check_allocation_axiom, check_non_wasteful, check_representation_efficient,
    check_second_stage_sp, AllocationAxiom, SpMode, SpOptions, SpWitness,
};
use pbflow::{
    ideal_set, Agent, AllocationInstance, AllocationRule, ApprovalMaximising, ApprovalProfile,
    Error, GreedyApproval, Instance, Nomination, PreferenceModel, PreferenceOrder, ProjectSet,
    ShortlistingProfile, ShortlistingRule, TieBreakPolicy,
};

use super::oracles;
use super::SuiteResult;

pub const MODELS: [PreferenceModel; 2] = [PreferenceModel::Overlap, PreferenceModel::Cost];

pub fn allocation_rules() -> Vec<(&'static str, Box<dyn AllocationRule>)> {
    vec![
        ("greedy-approval", Box::new(GreedyApproval)),
        (
            "approval-maximising",
            Box::new(ApprovalMaximising::canonical()),
        ),
    ]
}

fn costs_of(instance: &Instance) -> Vec<u64> {
    (0..instance.len()).map(|p| instance.cost(p)).collect()
}

fn coords_of(instance: &Instance) -> Vec<Vec<f64>> {
    instance
        .projects()
        .iter()
        .map(|p| p.coords.clone().expect("suite instances have coordinates"))
        .collect()
}

fn identity(m: usize) -> PreferenceOrder {
    PreferenceOrder::from_positions((0..m).collect())
}

/// Every tuple of `len` items drawn from `items`.
fn tuples<T: Copy>(items: &[T], len: usize) -> Vec<Vec<T>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                items.iter().map(move |&x| {
                    let mut t = t.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
    }
    out
}

/// Nomination followed by `allocation` is unrestricted-pessimistic FSSP
/// for agent 0 on every small instance: up to 3 projects with costs in
/// {1,2}, every budget from the largest cost to 3, up to 3 agents, every
/// preference order and awareness set of agent 0, and every profile of
/// feasible proposals of the others (who know every project).
pub fn nomination_fssp(allocation: &dyn AllocationRule) -> SuiteResult {
    let mut result = SuiteResult::default();
    for m in 1..=3 {
        for costs in suite::cost_vectors(m, &[1, 2]) {
            let max = *costs.iter().max().unwrap();
            for budget in max..=3 {
                let instance = Instance::with_costs(&costs, budget).unwrap();
                let all = instance.all();
                let feasible: Vec<ProjectSet> = all
                    .subsets()
                    .filter(|&s| instance.total_cost(s) <= budget)
                    .collect();
                for model in MODELS {
                    let mut strategist = Strategist::new(
                        &instance,
                        &Nomination,
                        allocation,
                        model,
                        SearchLimits::default(),
                    );
                    for n in 1..=3 {
                        let others = tuples(&feasible, n - 1);
                        for perm in suite::permutations(m) {
                            for awareness in all.subsets() {
                                let mut agents = vec![Agent::new(
                                    PreferenceOrder::from_positions(perm.clone()),
                                    awareness,
                                )];
                                agents.extend((1..n).map(|_| Agent::new(identity(m), all)));
                                for rest in &others {
                                    let mut proposals = vec![agents[0].ideal(&instance, awareness)];
                                    proposals.extend(rest);
                                    let profile = ShortlistingProfile::new(proposals);
                                    let report = strategist
                                        .check_fssp(
                                            &agents,
                                            &profile,
                                            FsspVariant::Unrestricted,
                                            ManipulationMode::Pessimistic,
                                            Some(&[0]),
                                        )
                                        .unwrap();
                                    result.check(report.verdict == FsspVerdict::Holds && report.exact, || {
                                        format!(
                                            "costs {costs:?} budget {budget} {model:?} order {perm:?} awareness {} \
                                             proposals {:?}: {:?}",
                                            instance.display(awareness),
                                            profile.proposals().iter().map(|&p| instance.display(p)).collect::<Vec<_>>(),
                                            report.witness
                                        )
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    result
}

/// Second-stage strategyproofness on unit-cost instances with up to 4
/// projects and 3 agents, every profile enumerated, agent 0 holding every
/// possible ideal set.
pub fn unit_cost_sp(rule: &dyn AllocationRule, model: PreferenceModel) -> SuiteResult {
    let mut result = SuiteResult::default();
    for m in 1..=4 {
        for budget in 1..=m as u64 {
            let instance = Instance::unit(m, budget).unwrap();
            let inst = AllocationInstance::new(&instance, instance.all()).unwrap();
            let mut ideals = Vec::new();
            for perm in suite::permutations(m) {
                let order = PreferenceOrder::from_positions(perm);
                let ideal = ideal_set(&instance, &order, instance.all());
                if !ideals.contains(&ideal) {
                    ideals.push(ideal);
                    for n in 1..=3 {
                        let mut orders = vec![order.clone()];
                        orders.extend((1..n).map(|_| identity(m)));
                        let options = SpOptions {
                            agents: Some(vec![0]),
                            ..SpOptions::default()
                        };
                        let verdict = check_second_stage_sp(
                            rule,
                            &inst,
                            &orders,
                            model,
                            &SpMode::Full,
                            &options,
                        )
                        .unwrap();
                        result.check(verdict.witness.is_none() && verdict.exact, || {
                            format!("m {m} budget {budget} n {n}: {:?}", verdict.witness)
                        });
                    }
                }
            }
        }
    }
    result
}

/// Greedy-approval and canonical approval-maximising agree on every
/// unit-cost profile with up to 4 projects and 3 agents.
pub fn unit_cost_rules_coincide() -> SuiteResult {
    let mut result = SuiteResult::default();
    let greedy = GreedyApproval;
    let maximising = ApprovalMaximising::canonical();
    for m in 1..=4 {
        for budget in 1..=m as u64 {
            let instance = Instance::unit(m, budget).unwrap();
            let inst = AllocationInstance::new(&instance, instance.all()).unwrap();
            let ballots: Vec<ProjectSet> = instance.all().subsets().collect();
            for n in 1..=3 {
                for profile in tuples(&ballots, n) {
                    let profile = ApprovalProfile::new(profile);
                    let a = greedy.allocate(&inst, &profile).unwrap();
                    let b = maximising.allocate(&inst, &profile).unwrap();
                    result.check(a == b, || {
                        format!("m {m} budget {budget} {profile:?}: {a:?} vs {b:?}")
                    });
                }
            }
        }
    }
    result
}

pub const GREEDY_SCENARIOS: u64 = 10_000;
pub const GREEDY_SEED: u64 = 7;

pub fn greedy_params() -> SuiteParams {
    SuiteParams {
        projects: 2..=6,
        agents: 1..=4,
        costs: 1..=6,
        budget_factor: 3,
        grid: None,
    }
}

/// Approximate strategyproofness of greedy-approval on seeded scenarios,
/// others voting as drawn. Returns the scenario count and every witness
/// with the agents' orders.
pub fn greedy_approximate_sp(
    model: PreferenceModel,
    seed: u64,
) -> (u64, Vec<(SpWitness, Vec<PreferenceOrder>)>) {
    let mut rng = suite::rng(seed);
    let mut witnesses = Vec::new();
    for _ in 0..GREEDY_SCENARIOS {
        let (instance, shortlist, profile, orders) =
            suite::random_allocation_case(&mut rng, &greedy_params());
        let inst = AllocationInstance::new(&instance, shortlist).unwrap();
        let options = SpOptions {
            approximate: true,
            ..SpOptions::default()
        };
        let verdict = check_second_stage_sp(
            &GreedyApproval,
            &inst,
            &orders,
            model,
            &SpMode::FixedOthers(profile),
            &options,
        )
        .unwrap();
        if let Some(w) = verdict.witness {
            assert!(w.replay(&GreedyApproval).unwrap());
            witnesses.push((w, orders));
        }
    }
    (GREEDY_SCENARIOS, witnesses)
}

/// The replayable document recorded for a greedy approximate-SP witness.
pub fn witness_document(w: &SpWitness, orders: &[PreferenceOrder]) -> ScenarioDocument {
    let ids = |s: pbflow::ProjectSet| w.instance.indices(s);
    let mut doc = instance_document("greedy-approx-overlap", &w.instance);
    doc.description =
        "First overlap-model counterexample to approximate strategyproofness of greedy-approval \
        found by the seeded random search."
            .into();
    doc.agents = orders
        .iter()
        .map(|o| AgentDoc {
            ranking: o.ids(&w.instance).iter().map(|p| p.index()).collect(),
            awareness: None,
        })
        .collect();
    doc.shortlist = Some(ids(w.shortlist));
    doc.ballots = Some(w.profile.ballots().iter().map(|&b| ids(b)).collect());
    doc.config = Config {
        allocation: Some("greedy-approval".into()),
        model: Some(PreferenceModel::Overlap),
        approximate: Some(true),
        sp_mode: Some("fixed-others".into()),
        agent: Some(w.agent + 1),
        ..Config::default()
    };
    doc.expectations = vec![Expectation {
        label: "approximate manipulation under the overlap model".into(),
        command: "check-ssp".into(),
        config: Config::default(),
        expect: [
            ("verdict".to_string(), json!("violated")),
            ("witness.deviation".to_string(), json!(ids(w.deviation))),
            (
                "witness.truthful_outcome".to_string(),
                json!(ids(w.truthful_outcome)),
            ),
            (
                "witness.manipulated_outcome".to_string(),
                json!(ids(w.manipulated_outcome)),
            ),
        ]
        .into_iter()
        .collect(),
        informational: None,
    }];
    doc
}

pub const ORACLE_CASES: u64 = 500;

fn shortlisting_params(
    grid: Option<i64>,
    projects: std::ops::RangeInclusive<usize>,
) -> SuiteParams {
    SuiteParams {
        projects,
        agents: 1..=5,
        costs: 1..=6,
        budget_factor: 3,
        grid,
    }
}

pub fn equal_representation_oracle(seed: u64) -> SuiteResult {
    let mut result = SuiteResult::default();
    let mut rng = suite::rng(seed);
    for _ in 0..ORACLE_CASES {
        let (instance, profile) =
            suite::random_shortlisting_case(&mut rng, &shortlisting_params(None, 1..=10));
        let k = rng.gen_range(1..=3);
        let got = EqualRepresentation::new(k)
            .shortlist(&instance, &profile)
            .unwrap();
        let proposals: Vec<u64> = profile.proposals().iter().map(|p| p.bits()).collect();
        let want =
            oracles::equal_representation(&costs_of(&instance), instance.budget(), &proposals, k);
        result.check(got.bits() == want, || {
            format!("k {k} {instance:?} {profile:?}: got {got:?}, oracle {want:#b}")
        });
    }
    result
}

pub fn k_median_oracle(seed: u64) -> SuiteResult {
    let mut result = SuiteResult::default();
    let mut rng = suite::rng(seed);
    for _ in 0..ORACLE_CASES {
        let (instance, profile) =
            suite::random_shortlisting_case(&mut rng, &shortlisting_params(Some(4), 1..=8));
        let k = rng.gen_range(1..=3);
        let metric = Metric::euclidean(&instance).unwrap();
        let got = k_median(&instance, &profile, k, &metric, KMedian::DEFAULT_CAP);
        let want = oracles::k_median(
            &costs_of(&instance),
            instance.budget(),
            &coords_of(&instance),
            profile.union().bits(),
            k,
        );
        let ok = match (&got, want) {
            (Ok(o), Some((s, ell))) => {
                o.shortlist.bits() == s && (o.ell - ell).abs() <= oracles::EPS
            }
            (Err(Error::NoPartition), None) => true,
            _ => false,
        };
        result.check(ok, || {
            format!("k {k} {instance:?} {profile:?}: got {got:?}, oracle {want:?}")
        });
    }
    result
}

fn random_priority(rng: &mut SuiteRng, instance: &AllocationInstance<'_>) -> Vec<ProjectSet> {
    let mut list = Vec::new();
    for _ in 0..rng.gen_range(0..=4) {
        let s = suite::random_subset(rng, instance.shortlist);
        if instance.is_feasible(s) && !list.contains(&s) {
            list.push(s);
        }
    }
    list
}

/// Approval-maximising against enumeration of every feasible subset, with
/// canonical tie-breaking on even cases and a random priority list on odd
/// ones. Greedy-approval is compared with its oracle on the same cases.
pub fn allocation_oracle(seed: u64) -> SuiteResult {
    let mut result = SuiteResult::default();
    let mut rng = suite::rng(seed);
    let params = SuiteParams {
        projects: 1..=10,
        agents: 1..=6,
        costs: 1..=6,
        budget_factor: 3,
        grid: None,
    };
    for case in 0..ORACLE_CASES {
        let (instance, shortlist, profile, _) = suite::random_allocation_case(&mut rng, &params);
        let inst = AllocationInstance::new(&instance, shortlist).unwrap();
        let priority = if case % 2 == 1 {
            random_priority(&mut rng, &inst)
        } else {
            vec![]
        };
        let rule = if priority.is_empty() {
            ApprovalMaximising::canonical()
        } else {
            ApprovalMaximising::with_policy(TieBreakPolicy::priority(priority.clone()).unwrap())
        };
        let costs = costs_of(&instance);
        let ballots: Vec<u64> = profile.ballots().iter().map(|b| b.bits()).collect();
        let bits: Vec<u64> = priority.iter().map(|p| p.bits()).collect();
        let got = rule.allocate(&inst, &profile).unwrap();
        let want = oracles::approval_maximising(
            &costs,
            instance.budget(),
            shortlist.bits(),
            &ballots,
            &bits,
        );
        result.check(got.bits() == want, || {
            format!("{instance:?} shortlist {shortlist:?} {profile:?} priority {priority:?}: got {got:?}, oracle {want:#b}")
        });
        let got = GreedyApproval.allocate(&inst, &profile).unwrap();
        let want = oracles::greedy_approval(&costs, instance.budget(), shortlist.bits(), &ballots);
        result.check(got.bits() == want, || {
            format!("greedy {instance:?} shortlist {shortlist:?} {profile:?}: got {got:?}, oracle {want:#b}")
        });
    }
    result
}

pub const AXIOM_CASES: u64 = 300;

/// Truthful proposals: each agent's ideal set within a random awareness set.
fn truthful_case(rng: &mut SuiteRng, params: &SuiteParams) -> (Instance, ShortlistingProfile) {
    let instance = suite::random_instance(rng, params);
    let n = suite::random_agent_count(rng, params);
    let proposals = (0..n)
        .map(|_| {
            let order = suite::random_order(rng, &instance);
            let awareness = suite::random_nonempty_subset(rng, instance.all());
            ideal_set(&instance, &order, awareness)
        })
        .collect();
    (instance, ShortlistingProfile::new(proposals))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShortlistAxiom {
    NonWasteful,
    RepresentationEfficient,
}

pub enum RuleChoice {
    Nomination,
    EqualRepresentation(u64),
    KMedian(u64),
}

impl RuleChoice {
    fn build(&self, instance: &Instance) -> Box<dyn ShortlistingRule> {
        match *self {
            RuleChoice::Nomination => Box::new(Nomination),
            RuleChoice::EqualRepresentation(k) => Box::new(EqualRepresentation::new(k)),
            RuleChoice::KMedian(k) => {
                Box::new(KMedian::new(k, Metric::euclidean(instance).unwrap()))
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            RuleChoice::Nomination => "nomination".into(),
            RuleChoice::EqualRepresentation(k) => format!("{k}-equal-representation"),
            RuleChoice::KMedian(k) => format!("{k}-median"),
        }
    }
}

/// Checks `axiom` for `rule` on seeded truthful profiles. Cases where
/// k-median admits no partition at all are skipped and not counted.
pub fn shortlist_axiom(rule: &RuleChoice, axiom: ShortlistAxiom, seed: u64) -> SuiteResult {
    let mut result = SuiteResult::default();
    let mut rng = suite::rng(seed);
    let params = shortlisting_params(Some(4), 1..=8);
    let mut drawn = 0;
    while drawn < AXIOM_CASES {
        drawn += 1;
        let (instance, profile) = truthful_case(&mut rng, &params);
        let f = rule.build(&instance);
        let verdict = match axiom {
            ShortlistAxiom::NonWasteful => check_non_wasteful(f.as_ref(), &instance, &profile),
            ShortlistAxiom::RepresentationEfficient => {
                check_representation_efficient(f.as_ref(), &instance, &profile)
            }
        };
        match verdict {
            Err(Error::NoPartition) => continue,
            Err(e) => panic!("{e}"),
            Ok(v) => result.check(v.is_holding(), || {
                format!("{}: {:?}", rule.label(), v.witness)
            }),
        }
    }
    result
}

/// Seeded search for a profile where k-median's shortlist is
/// representatively dominated. Returns the number of profiles tried and
/// the first witness confirmed by replay.
pub fn k_median_domination(seed: u64) -> (u64, Option<pbflow::verification::ShortlistWitness>) {
    let mut rng = suite::rng(seed);
    let params = shortlisting_params(Some(4), 2..=7);
    for tried in 1..=AXIOM_CASES {
        let (instance, profile) = truthful_case(&mut rng, &params);
        let rule = KMedian::new(rng.gen_range(1..=2), Metric::euclidean(&instance).unwrap());
        if let Ok(v) = check_representation_efficient(&rule, &instance, &profile) {
            if let Some(w) = v.witness {
                assert!(w.replay(&rule).unwrap());
                return (tried, Some(w));
            }
        }
    }
    (AXIOM_CASES, None)
}

/// Allocation axioms on seeded allocation cases with at least three agents.
pub fn allocation_axioms(
    rule: &dyn AllocationRule,
    axioms: &[AllocationAxiom],
    seed: u64,
) -> SuiteResult {
    let mut result = SuiteResult::default();
    let mut rng = suite::rng(seed);
    let params = SuiteParams {
        projects: 1..=6,
        agents: 3..=4,
        costs: 1..=6,
        budget_factor: 3,
        grid: None,
    };
    for _ in 0..AXIOM_CASES {
        let (instance, shortlist, profile, _) = suite::random_allocation_case(&mut rng, &params);
        let inst = AllocationInstance::new(&instance, shortlist).unwrap();
        for &axiom in axioms {
            let v = check_allocation_axiom(rule, axiom, &inst, &profile).unwrap();
            result.check(v.is_holding(), || {
                format!("{}: {:?}", axiom.name(), v.witness)
            });
        }
    }
    result
}
