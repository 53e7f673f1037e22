//! Running commands on scenarios, producing deterministic JSON reports.

use std::fmt;
use std::str::FromStr;

use serde_json::{json, Map, Value};

use super::document::{Config, Expectation, Scenario, ScenarioDocument};
use super::fixtures;
use crate::allocation::{
    approval_scores, AllocationRule, ApprovalMaximising, ApprovalProfile, GreedyApproval,
    TieBreakPolicy,
};
use crate::error::{Error, Result};
use crate::model::{AllocationInstance, ProjectSet};
use crate::preferences::{PreferenceModel, PreferenceOrder};
use crate::shortlisting::{
    k_median, EqualRepresentation, KMedian, Metric, Nomination, ShortlistingProfile,
    ShortlistingRule,
};
use crate::strategy::{
    verify_fssp_implications, FsspReport, FsspVariant, FsspVerdict, ManipulationMode,
    ManipulationWitness, SearchLimits, Strategist, Verdict,
};
use crate::verification::{
    check_allocation_axiom, check_non_wasteful, check_representation_efficient,
    check_second_stage_sp, find_representative_domination, AllocationAxiom, AllocationWitness,
    PropertyVerdict, ShortlistWitness, SpMode, SpOptions, SpWitness, DOMINATION_CAP,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Shortlist,
    Allocate,
    EndToEnd,
    CheckAxiom,
    CheckSsp,
    CheckFssp,
    Replay,
    PaperSuite,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::Shortlist,
        Command::Allocate,
        Command::EndToEnd,
        Command::CheckAxiom,
        Command::CheckSsp,
        Command::CheckFssp,
        Command::Replay,
        Command::PaperSuite,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Shortlist => "shortlist",
            Command::Allocate => "allocate",
            Command::EndToEnd => "end-to-end",
            Command::CheckAxiom => "check-axiom",
            Command::CheckSsp => "check-ssp",
            Command::CheckFssp => "check-fssp",
            Command::Replay => "replay",
            Command::PaperSuite => "paper-suite",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown command `{s}`")))
    }
}

/// A command's result. `witness` is a standalone document reproducing the
/// reported counterexample, when there is one.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub json: Value,
    pub witness: Option<ScenarioDocument>,
}

impl Report {
    pub fn to_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.json).expect("reports serialize");
        s.push('\n');
        s
    }

    /// Value at a dotted path such as `witness.agent` or `cells.0`.
    pub fn get(&self, path: &str) -> Option<&Value> {
        lookup(&self.json, path)
    }
}

pub fn lookup<'v>(value: &'v Value, path: &str) -> Option<&'v Value> {
    path.split('.').try_fold(value, |v, seg| match v {
        Value::Object(m) => m.get(seg),
        Value::Array(a) => seg.parse::<usize>().ok().and_then(|i| a.get(i)),
        _ => None,
    })
}

/// Structural equality with a small tolerance on numbers.
pub fn values_match(expected: &Value, actual: &Value) -> bool {
    match (expected, actual) {
        (Value::Number(a), Value::Number(b)) => match (a.as_f64(), b.as_f64()) {
            (Some(x), Some(y)) => (x - y).abs() <= 1e-9 * (1.0 + x.abs().max(y.abs())),
            _ => a == b,
        },
        (Value::Array(a), Value::Array(b)) => {
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| values_match(x, y))
        }
        (Value::Object(a), Value::Object(b)) => {
            a.len() == b.len()
                && a.iter()
                    .all(|(k, x)| b.get(k).is_some_and(|y| values_match(x, y)))
        }
        _ => expected == actual,
    }
}

const DEFAULT_SAMPLES: u64 = 512;

/// Fully resolved configuration of one run.
struct Settings {
    shortlisting: Box<dyn ShortlistingRule>,
    kmedian: Option<KMedian>,
    allocation: Box<dyn AllocationRule>,
    model: PreferenceModel,
    mode: ManipulationMode,
    variant: FsspVariant,
    sp_mode: String,
    approximate: bool,
    agent: Option<usize>,
    deviation: Option<ProjectSet>,
    axiom: Option<String>,
    table: bool,
    limits: SearchLimits,
    sp_full_cap: u64,
    domination_cap: u64,
    echo: Value,
}

fn settings(scenario: &Scenario, config: &Config) -> Result<Settings> {
    let k = config.k.unwrap_or(1);
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let caps = &config.caps;
    let representation_cap = caps
        .representation
        .unwrap_or(EqualRepresentation::DEFAULT_CAP as u64);
    let partition_cap = caps.partition.unwrap_or(KMedian::DEFAULT_CAP as u64);
    let shortlisting_name = config
        .shortlisting
        .clone()
        .unwrap_or_else(|| "nomination".into());
    let mut metric_name = Value::Null;
    let mut kmedian = None;
    let shortlisting: Box<dyn ShortlistingRule> = match shortlisting_name.as_str() {
        "nomination" => Box::new(Nomination),
        "equal-representation" => Box::new(EqualRepresentation {
            k,
            cap: representation_cap as usize,
        }),
        "k-median" => {
            let name = config.metric.clone().unwrap_or_else(|| {
                if scenario.distances.is_some() {
                    "table"
                } else {
                    "euclidean"
                }
                .into()
            });
            let metric = match name.as_str() {
                "euclidean" => Metric::euclidean(&scenario.instance)?,
                "table" => scenario
                    .distances
                    .clone()
                    .ok_or_else(|| Error::invalid("metric `table` needs instance.distances"))?,
                other => return Err(Error::invalid(format!("unknown metric `{other}`"))),
            };
            metric_name = json!(name);
            let rule = KMedian {
                k,
                metric,
                cap: partition_cap as usize,
            };
            kmedian = Some(rule.clone());
            Box::new(rule)
        }
        other => {
            return Err(Error::invalid(format!(
                "unknown shortlisting rule `{other}`"
            )))
        }
    };
    let allocation_name = config
        .allocation
        .clone()
        .unwrap_or_else(|| "greedy-approval".into());
    let maximizer_cap = caps
        .maximizer
        .unwrap_or(ApprovalMaximising::DEFAULT_MAXIMIZER_CAP);
    let allocation: Box<dyn AllocationRule> = match allocation_name.as_str() {
        "greedy-approval" => {
            if config.priority.is_some() {
                return Err(Error::invalid(
                    "a priority list only applies to approval-maximising",
                ));
            }
            Box::new(GreedyApproval)
        }
        "approval-maximising" => {
            let policy = match &config.priority {
                Some(list) => TieBreakPolicy::priority(
                    list.iter()
                        .map(|s| scenario.set("priority list", s))
                        .collect::<Result<Vec<_>>>()?,
                )?,
                None => TieBreakPolicy::Canonical,
            };
            Box::new(ApprovalMaximising {
                policy,
                maximizer_cap,
            })
        }
        other => return Err(Error::invalid(format!("unknown allocation rule `{other}`"))),
    };
    let sp_mode = config
        .sp_mode
        .clone()
        .unwrap_or_else(|| "fixed-others".into());
    if !["fixed-others", "full", "sampled"].contains(&sp_mode.as_str()) {
        return Err(Error::invalid(format!(
            "unknown second-stage mode `{sp_mode}`"
        )));
    }
    let agent = match config.agent {
        Some(0) => return Err(Error::invalid("agents are numbered from 1")),
        Some(a) => Some(a - 1),
        None => None,
    };
    let deviation = config
        .deviation
        .as_ref()
        .map(|d| scenario.set("deviation", d))
        .transpose()?;
    let limits = SearchLimits {
        ballot_cap: caps.ballot.unwrap_or(12) as usize,
        profile_cap: caps.profile.unwrap_or(1 << 16),
        deviation_cap: caps.deviation.unwrap_or(12) as usize,
        sampling: true,
        samples: config.samples.unwrap_or(DEFAULT_SAMPLES),
        seed: config.seed.unwrap_or(0),
    };
    let model = config.model.unwrap_or_default();
    let mode = config.mode.unwrap_or(ManipulationMode::Pessimistic);
    let variant = config.variant.unwrap_or(FsspVariant::Restricted);
    let sp_full_cap = caps.sp_full.unwrap_or(SpOptions::DEFAULT_FULL_CAP);
    let domination_cap = caps.domination.unwrap_or(DOMINATION_CAP as u64);
    let echo = json!({
        "shortlisting": shortlisting.name(),
        "k": k,
        "metric": metric_name,
        "allocation": allocation.name(),
        "priority": config.priority,
        "model": model,
        "mode": mode,
        "variant": variant,
        "sp_mode": sp_mode,
        "approximate": config.approximate.unwrap_or(false),
        "agent": config.agent,
        "deviation": config.deviation,
        "axiom": config.axiom,
        "table": config.table.unwrap_or(false),
        "caps": {
            "ballot": limits.ballot_cap,
            "profile": limits.profile_cap,
            "deviation": limits.deviation_cap,
            "partition": partition_cap,
            "representation": representation_cap,
            "maximizer": maximizer_cap,
            "sp_full": sp_full_cap,
            "domination": domination_cap,
        },
        "samples": limits.samples,
        "seed": limits.seed,
    });
    Ok(Settings {
        shortlisting,
        kmedian,
        allocation,
        model,
        mode,
        variant,
        sp_mode,
        approximate: config.approximate.unwrap_or(false),
        agent,
        deviation,
        axiom: config.axiom.clone(),
        table: config.table.unwrap_or(false),
        limits,
        sp_full_cap,
        domination_cap,
        echo,
    })
}

fn need_agents(scenario: &Scenario, what: &str) -> Result<()> {
    if scenario.agents.is_empty() {
        return Err(Error::invalid(format!(
            "{what} needs agents with preferences"
        )));
    }
    Ok(())
}

fn proposals(scenario: &Scenario) -> Result<ShortlistingProfile> {
    if let Some(p) = &scenario.proposals {
        return Ok(p.clone());
    }
    need_agents(scenario, "computing truthful proposals")?;
    Ok(ShortlistingProfile::new(
        scenario
            .agents
            .iter()
            .map(|a| a.ideal(&scenario.instance, a.awareness))
            .collect(),
    ))
}

fn shortlist(scenario: &Scenario, s: &Settings) -> Result<ProjectSet> {
    match scenario.shortlist {
        Some(set) => Ok(set),
        None => s
            .shortlisting
            .shortlist(&scenario.instance, &proposals(scenario)?),
    }
}

fn ballots(scenario: &Scenario, shortlist: ProjectSet) -> Result<ApprovalProfile> {
    if let Some(b) = &scenario.ballots {
        if let Some(i) = b.ballots().iter().position(|x| !x.is_subset(shortlist)) {
            return Err(Error::invalid(format!(
                "ballot of agent {} approves projects outside the shortlist",
                i + 1
            )));
        }
        return Ok(b.clone());
    }
    need_agents(scenario, "computing truthful ballots")?;
    Ok(ApprovalProfile::new(
        scenario
            .agents
            .iter()
            .map(|a| a.ideal(&scenario.instance, shortlist))
            .collect(),
    ))
}

struct Ctx<'a> {
    scenario: &'a Scenario,
    config: &'a Config,
}

impl Ctx<'_> {
    /// The scenario with the effective configuration, as a base for witnesses.
    fn document(&self) -> ScenarioDocument {
        let mut doc = self.scenario.document.clone();
        doc.config = self.config.clone();
        doc
    }

    fn set(&self, set: ProjectSet) -> Value {
        json!(self.scenario.ids(set))
    }

    fn sets(&self, sets: &[ProjectSet]) -> Value {
        Value::Array(sets.iter().map(|&s| self.set(s)).collect())
    }
}

/// Runs one command. `overrides` is merged over the document's configuration.
pub fn run_command(command: Command, scenario: &Scenario, overrides: &Config) -> Result<Report> {
    match command {
        Command::Replay => return replay(scenario),
        Command::PaperSuite => return paper_suite(),
        _ => {}
    }
    let config = scenario.document.config.merged(overrides);
    let s = settings(scenario, &config)?;
    let cx = Ctx {
        scenario,
        config: &config,
    };
    let mut body = Map::new();
    body.insert("command".into(), json!(command.name()));
    body.insert("scenario".into(), json!(scenario.document.name));
    body.insert("config".into(), s.echo.clone());
    let witness = match command {
        Command::Shortlist => {
            shortlist_command(&cx, &s, &mut body)?;
            None
        }
        Command::Allocate | Command::EndToEnd => {
            allocate_command(&cx, &s, command, &mut body)?;
            None
        }
        Command::CheckAxiom => axiom_command(&cx, &s, &mut body)?,
        Command::CheckSsp => ssp_command(&cx, &s, &mut body)?,
        Command::CheckFssp => fssp_command(&cx, &s, &mut body)?,
        Command::Replay | Command::PaperSuite => unreachable!(),
    };
    Ok(Report {
        json: Value::Object(body),
        witness,
    })
}

fn shortlist_command(cx: &Ctx<'_>, s: &Settings, body: &mut Map<String, Value>) -> Result<()> {
    let sc = cx.scenario;
    let profile = proposals(sc)?;
    let mut outcome = Map::new();
    outcome.insert("proposals".into(), cx.sets(profile.proposals()));
    let set = match &s.kmedian {
        Some(rule) => {
            let out = k_median(&sc.instance, &profile, rule.k, &rule.metric, rule.cap)?;
            outcome.insert("ell".into(), json!(out.ell));
            let partitions: Vec<Value> = out
                .partitions
                .iter()
                .map(|p| {
                    json!({
                        "clusters": cx.sets(&p.clusters),
                        "medians": p.medians.iter().map(|&m| sc.instance.id(m).index()).collect::<Vec<_>>(),
                    })
                })
                .collect();
            outcome.insert("partitions".into(), Value::Array(partitions));
            out.shortlist
        }
        None => s.shortlisting.shortlist(&sc.instance, &profile)?,
    };
    outcome.insert("shortlist".into(), cx.set(set));
    outcome.insert("cost".into(), json!(sc.instance.total_cost(set)));
    body.insert("outcome".into(), Value::Object(outcome));
    Ok(())
}

fn allocate_command(
    cx: &Ctx<'_>,
    s: &Settings,
    command: Command,
    body: &mut Map<String, Value>,
) -> Result<()> {
    let sc = cx.scenario;
    let mut outcome = Map::new();
    let list = if command == Command::EndToEnd {
        let profile = proposals(sc)?;
        outcome.insert("proposals".into(), cx.sets(profile.proposals()));
        s.shortlisting.shortlist(&sc.instance, &profile)?
    } else {
        shortlist(sc, s)?
    };
    let inst = AllocationInstance::new(&sc.instance, list)?;
    let profile = ballots(sc, list)?;
    let allocation = s.allocation.allocate(&inst, &profile)?;
    let scores = approval_scores(&inst, &profile)?;
    outcome.insert("shortlist".into(), cx.set(list));
    outcome.insert("ballots".into(), cx.sets(profile.ballots()));
    outcome.insert(
        "scores".into(),
        Value::Array(
            list.iter()
                .map(|p| json!([sc.instance.id(p).index(), scores.get(p)]))
                .collect(),
        ),
    );
    outcome.insert("allocation".into(), cx.set(allocation));
    outcome.insert("cost".into(), json!(sc.instance.total_cost(allocation)));
    outcome.insert("status".into(), json!(inst.classify(allocation)));
    body.insert("outcome".into(), Value::Object(outcome));
    Ok(())
}

fn verdict_json<W>(v: &PropertyVerdict<W>) -> Value {
    json!({
        "property": v.property,
        "status": v.status,
        "exact": v.exact,
        "cases": v.cases,
    })
}

fn axiom_command(
    cx: &Ctx<'_>,
    s: &Settings,
    body: &mut Map<String, Value>,
) -> Result<Option<ScenarioDocument>> {
    let sc = cx.scenario;
    let wanted = s.axiom.clone().unwrap_or_else(|| "all".into());
    let known = [
        "all",
        "non-wasteful",
        "representation-efficient",
        "exhaustive",
        "unanimous",
        "strongly-unanimous",
    ];
    if !known.contains(&wanted.as_str()) {
        return Err(Error::invalid(format!("unknown axiom `{wanted}`")));
    }
    let pick = |name: &str| wanted == "all" || wanted == name;
    let mut verdicts = Vec::new();
    let mut witness_json = Value::Null;
    let mut witness_doc = None;
    let mut record_shortlist = |v: PropertyVerdict<ShortlistWitness>,
                                axiom: &str,
                                verdicts: &mut Vec<Value>| {
        let mut j = verdict_json(&v);
        if let Some(w) = &v.witness {
            let mut wj = json!({
                "proposals": cx.sets(w.profile.proposals()),
                "shortlist": cx.set(w.shortlist),
            });
            if let Some(d) = w.dominating {
                wj["dominating"] = cx.set(d);
            }
            j["witness"] = wj.clone();
            if witness_doc.is_none() {
                witness_json = wj;
                let mut doc = cx.document();
                doc.proposals = Some(w.profile.proposals().iter().map(|&p| sc.ids(p)).collect());
                doc.config.axiom = Some(axiom.into());
                doc.expectations = vec![Expectation {
                    label: format!("recorded {axiom} counterexample"),
                    command: "check-axiom".into(),
                    config: Config::default(),
                    expect: [("verdict".to_string(), json!("violated"))]
                        .into_iter()
                        .collect(),
                    informational: None,
                }];
                witness_doc = Some(doc);
            }
        }
        verdicts.push(j);
    };
    if pick("non-wasteful") || pick("representation-efficient") {
        let profile = proposals(sc)?;
        if pick("non-wasteful") {
            record_shortlist(
                check_non_wasteful(s.shortlisting.as_ref(), &sc.instance, &profile)?,
                "non-wasteful",
                &mut verdicts,
            );
        }
        if pick("representation-efficient") {
            let v = if s.domination_cap == DOMINATION_CAP as u64 {
                check_representation_efficient(s.shortlisting.as_ref(), &sc.instance, &profile)?
            } else {
                let list = s.shortlisting.shortlist(&sc.instance, &profile)?;
                let property = format!("representation efficiency of {}", s.shortlisting.name());
                match find_representative_domination(
                    &sc.instance,
                    &profile,
                    list,
                    s.domination_cap as usize,
                )? {
                    None => PropertyVerdict::holds(property, true, 1),
                    Some(d) => PropertyVerdict::violated(
                        property,
                        true,
                        1,
                        ShortlistWitness {
                            instance: sc.instance.clone(),
                            profile: profile.clone(),
                            shortlist: list,
                            dominating: Some(d),
                        },
                    ),
                }
            };
            record_shortlist(v, "representation-efficient", &mut verdicts);
        }
    }
    let alloc_axioms: Vec<AllocationAxiom> = AllocationAxiom::ALL
        .into_iter()
        .filter(|a| pick(a.name()))
        .collect();
    if !alloc_axioms.is_empty() {
        let list = shortlist(sc, s)?;
        let inst = AllocationInstance::new(&sc.instance, list)?;
        let profile = ballots(sc, list)?;
        for axiom in alloc_axioms {
            let v: PropertyVerdict<AllocationWitness> =
                check_allocation_axiom(s.allocation.as_ref(), axiom, &inst, &profile)?;
            let mut j = verdict_json(&v);
            if let Some(w) = &v.witness {
                let wj = json!({
                    "shortlist": cx.set(w.shortlist),
                    "ballots": cx.sets(w.profile.ballots()),
                    "outcome": cx.set(w.outcome),
                    "required": w.required.map(|r| cx.set(r)),
                });
                j["witness"] = wj.clone();
                if witness_doc.is_none() {
                    witness_json = wj;
                    let mut doc = cx.document();
                    doc.shortlist = Some(sc.ids(w.shortlist));
                    doc.ballots = Some(w.profile.ballots().iter().map(|&b| sc.ids(b)).collect());
                    doc.config.axiom = Some("exhaustive".into());
                    doc.expectations = vec![Expectation {
                        label: format!("recorded {} counterexample", axiom.name()),
                        command: "check-axiom".into(),
                        config: Config::default(),
                        expect: [("verdict".to_string(), json!("violated"))]
                            .into_iter()
                            .collect(),
                        informational: None,
                    }];
                    // The unanimity profile itself only shows an exhaustiveness
                    // failure if that is what it is; keep the axiom that failed.
                    doc.config.axiom = Some(axiom.name().into());
                    if axiom != AllocationAxiom::Exhaustive {
                        doc.ballots = None;
                    }
                    witness_doc = Some(doc);
                }
            }
            verdicts.push(j);
        }
    }
    let violated = witness_doc.is_some();
    body.insert("verdicts".into(), Value::Array(verdicts));
    body.insert(
        "verdict".into(),
        json!(if violated { "violated" } else { "holds" }),
    );
    body.insert("witness".into(), witness_json);
    Ok(witness_doc)
}

fn orders(scenario: &Scenario) -> Vec<PreferenceOrder> {
    scenario.agents.iter().map(|a| a.order.clone()).collect()
}

fn ssp_command(
    cx: &Ctx<'_>,
    s: &Settings,
    body: &mut Map<String, Value>,
) -> Result<Option<ScenarioDocument>> {
    let sc = cx.scenario;
    need_agents(sc, "check-ssp")?;
    let list = shortlist(sc, s)?;
    let inst = AllocationInstance::new(&sc.instance, list)?;
    let mode = match s.sp_mode.as_str() {
        "fixed-others" => SpMode::FixedOthers(ballots(sc, list)?),
        "full" => SpMode::Full,
        _ => SpMode::Sampled {
            samples: s.limits.samples,
            seed: s.limits.seed,
        },
    };
    let options = SpOptions {
        approximate: s.approximate,
        agents: s.agent.map(|a| vec![a]),
        deviations: s.deviation.map(|d| vec![d]),
        full_cap: s.sp_full_cap,
    };
    let v = check_second_stage_sp(
        s.allocation.as_ref(),
        &inst,
        &orders(sc),
        s.model,
        &mode,
        &options,
    )?;
    let mut j = verdict_json(&v);
    body.insert("shortlist".into(), cx.set(list));
    body.insert(
        "verdict".into(),
        json!(if v.is_holding() { "holds" } else { "violated" }),
    );
    body.insert("exact".into(), json!(v.exact));
    body.insert("cases".into(), json!(v.cases));
    let doc = v.witness.as_ref().map(|w: &SpWitness| {
        let wj = json!({
            "agent": w.agent + 1,
            "ideal": cx.set(w.ideal),
            "profile": cx.sets(w.profile.ballots()),
            "deviation": cx.set(w.deviation),
            "truthful_outcome": cx.set(w.truthful_outcome),
            "manipulated_outcome": cx.set(w.manipulated_outcome),
        });
        j["witness"] = wj.clone();
        body.insert("witness".into(), wj);
        let mut doc = cx.document();
        doc.shortlist = Some(sc.ids(list));
        doc.ballots = Some(w.profile.ballots().iter().map(|&b| sc.ids(b)).collect());
        doc.config.sp_mode = Some("fixed-others".into());
        doc.config.agent = Some(w.agent + 1);
        doc.config.deviation = Some(sc.ids(w.deviation));
        doc.config.approximate = Some(s.approximate);
        doc.config.model = Some(s.model);
        doc.expectations = vec![Expectation {
            label: "recorded second-stage manipulation".into(),
            command: "check-ssp".into(),
            config: Config::default(),
            expect: [
                ("verdict".to_string(), json!("violated")),
                (
                    "witness.truthful_outcome".to_string(),
                    cx.set(w.truthful_outcome),
                ),
                (
                    "witness.manipulated_outcome".to_string(),
                    cx.set(w.manipulated_outcome),
                ),
            ]
            .into_iter()
            .collect(),
            informational: None,
        }];
        doc
    });
    if doc.is_none() {
        body.insert("witness".into(), Value::Null);
    }
    body.insert("property".into(), j);
    Ok(doc)
}

fn manipulation_json(cx: &Ctx<'_>, w: &ManipulationWitness) -> Value {
    let opt_set = |s: Option<ProjectSet>| s.map(|x| cx.set(x)).unwrap_or(Value::Null);
    let opt_profile = |p: &Option<ApprovalProfile>| {
        p.as_ref()
            .map(|p| cx.sets(p.ballots()))
            .unwrap_or(Value::Null)
    };
    json!({
        "agent": w.agent + 1,
        "mode": w.mode,
        "proposals": cx.sets(w.proposals.proposals()),
        "truthful_proposal": cx.set(w.truthful_proposal()),
        "deviation": cx.set(w.deviation),
        "shortlist": cx.set(w.shortlist),
        "manipulated_shortlist": cx.set(w.manipulated_shortlist),
        "comparison_ideal": cx.set(w.comparison_ideal),
        "profile": opt_profile(&w.profile),
        "manipulated_profile": opt_profile(&w.manipulated_profile),
        "outcome": opt_set(w.outcome),
        "manipulated_outcome": opt_set(w.manipulated_outcome),
    })
}

fn manipulation_document(
    cx: &Ctx<'_>,
    s: &Settings,
    w: &ManipulationWitness,
    verdict: &str,
) -> ScenarioDocument {
    let sc = cx.scenario;
    let mut doc = cx.document();
    doc.proposals = Some(w.proposals.proposals().iter().map(|&p| sc.ids(p)).collect());
    doc.config.agent = Some(w.agent + 1);
    doc.config.deviation = Some(sc.ids(w.deviation));
    doc.config.mode = Some(w.mode);
    doc.config.model = Some(s.model);
    doc.config.table = None;
    let mut expect: std::collections::BTreeMap<String, Value> =
        [("verdict".to_string(), json!(verdict))]
            .into_iter()
            .collect();
    if let Some(o) = w.manipulated_outcome {
        expect.insert("witness.manipulated_outcome".into(), cx.set(o));
    }
    doc.expectations = vec![Expectation {
        label: "recorded first-stage manipulation".into(),
        command: "check-fssp".into(),
        config: Config::default(),
        expect,
        informational: None,
    }];
    doc
}

fn fssp_json(cx: &Ctx<'_>, r: &FsspReport) -> Value {
    json!({
        "variant": r.variant,
        "mode": r.mode,
        "verdict": r.verdict,
        "exact": r.exact,
        "deviations_checked": r.deviations_checked,
        "witness": r.witness.as_ref().map(|w| manipulation_json(cx, w)),
    })
}

fn fssp_command(
    cx: &Ctx<'_>,
    s: &Settings,
    body: &mut Map<String, Value>,
) -> Result<Option<ScenarioDocument>> {
    let sc = cx.scenario;
    need_agents(sc, "check-fssp")?;
    let profile = proposals(sc)?;
    if profile.len() != sc.agents.len() {
        return Err(Error::invalid("need one proposal per agent"));
    }
    let mut strategist = Strategist::new(
        &sc.instance,
        s.shortlisting.as_ref(),
        s.allocation.as_ref(),
        s.model,
        s.limits.clone(),
    );
    if s.table {
        let table = strategist.fssp_table(&sc.agents, &profile)?;
        let mut cells = Map::new();
        for &(v, m, r) in &table.cells {
            cells.insert(format!("{}-FSSP-{}", v.letter(), m.letter()), json!(r));
        }
        let implications = verify_fssp_implications(&table);
        body.insert("cells".into(), Value::Object(cells));
        body.insert(
            "awareness_covers_proposals".into(),
            json!(table.awareness_covers_proposals),
        );
        body.insert(
            "implications".into(),
            json!({"checked": implications.checked, "violations": implications.violations}),
        );
        body.insert(
            "verdict".into(),
            json!(if implications.violations.is_empty() {
                "consistent"
            } else {
                "inconsistent"
            }),
        );
        return Ok(None);
    }
    if let (Some(agent), Some(deviation)) = (s.agent, s.deviation) {
        let report =
            strategist.check_manipulation(&sc.agents, &profile, agent, deviation, s.mode)?;
        let verdict = match report.verdict {
            Verdict::Successful => "successful",
            Verdict::Unsuccessful => "unsuccessful",
            Verdict::Unknown => "unknown",
        };
        body.insert("verdict".into(), json!(verdict));
        body.insert("exact".into(), json!(report.exact));
        body.insert("witness".into(), manipulation_json(cx, &report.witness));
        let doc = (report.verdict == Verdict::Successful)
            .then(|| manipulation_document(cx, s, &report.witness, verdict));
        return Ok(doc);
    }
    if s.deviation.is_some() {
        return Err(Error::invalid("a deviation needs an agent"));
    }
    let only = s.agent.map(|a| vec![a]);
    let report = strategist.check_fssp(&sc.agents, &profile, s.variant, s.mode, only.as_deref())?;
    body.insert(
        "verdict".into(),
        json!(match report.verdict {
            FsspVerdict::Holds => "holds",
            FsspVerdict::Violated => "violated",
            FsspVerdict::Unknown => "unknown",
        }),
    );
    body.insert("exact".into(), json!(report.exact));
    body.insert(
        "deviations_checked".into(),
        json!(report.deviations_checked),
    );
    body.insert(
        "witness".into(),
        report
            .witness
            .as_ref()
            .map(|w| manipulation_json(cx, w))
            .unwrap_or(Value::Null),
    );
    body.insert("fssp".into(), fssp_json(cx, &report));
    // The baseline proposal of the witness is already in its profile, so
    // replaying it as a single manipulation reproduces the verdict.
    Ok(report
        .witness
        .as_ref()
        .map(|w| manipulation_document(cx, s, w, "successful")))
}

/// Runs one recorded expectation and compares the report against it.
pub fn evaluate_expectation(scenario: &Scenario, exp: &Expectation) -> Value {
    let command = match exp.command.parse::<Command>() {
        Ok(c) if c != Command::Replay && c != Command::PaperSuite => c,
        _ => {
            return json!({
                "label": exp.label,
                "status": "fail",
                "error": format!("expectation cannot run command `{}`", exp.command),
            })
        }
    };
    let report = match run_command(command, scenario, &exp.config) {
        Ok(r) => r,
        Err(e) => {
            return json!({
                "label": exp.label,
                "command": exp.command,
                "status": "fail",
                "error": e.to_string(),
            })
        }
    };
    let mut mismatches = Vec::new();
    let mut checked = Map::new();
    for (path, expected) in &exp.expect {
        let actual = report.get(path).cloned().unwrap_or(Value::Null);
        if !values_match(expected, &actual) {
            mismatches.push(json!({"path": path, "expected": expected, "actual": actual}));
        }
        checked.insert(path.clone(), actual);
    }
    let mut out = json!({
        "label": exp.label,
        "command": exp.command,
        "computed": checked,
    });
    let status = if !mismatches.is_empty() {
        out["mismatches"] = Value::Array(mismatches);
        "fail"
    } else if exp.informational.is_some() {
        "informational"
    } else {
        "pass"
    };
    if let Some(info) = &exp.informational {
        let mut computed = Map::new();
        let mut agrees = true;
        for (path, claimed) in &info.claimed {
            let actual = report.get(path).cloned().unwrap_or(Value::Null);
            agrees &= values_match(claimed, &actual);
            computed.insert(path.clone(), actual);
        }
        out["informational"] = json!({
            "note": info.note,
            "claimed": info.claimed,
            "computed": computed,
            "claim_matches": agrees,
        });
    }
    out["status"] = json!(status);
    out
}

fn combine(statuses: impl IntoIterator<Item = String>) -> &'static str {
    let mut informational = false;
    for s in statuses {
        match s.as_str() {
            "fail" => return "fail",
            "informational" => informational = true,
            _ => {}
        }
    }
    if informational {
        "informational"
    } else {
        "pass"
    }
}

fn replay_value(scenario: &Scenario) -> Value {
    let results: Vec<Value> = scenario
        .document
        .expectations
        .iter()
        .map(|e| evaluate_expectation(scenario, e))
        .collect();
    let status = if results.is_empty() {
        "fail"
    } else {
        combine(
            results
                .iter()
                .map(|r| r["status"].as_str().unwrap_or("fail").to_string()),
        )
    };
    json!({
        "scenario": scenario.document.name,
        "status": status,
        "expectations": results,
    })
}

fn replay(scenario: &Scenario) -> Result<Report> {
    if scenario.document.expectations.is_empty() {
        return Err(Error::invalid(
            "the document records no expectations to replay",
        ));
    }
    let mut json = replay_value(scenario);
    json["command"] = json!("replay");
    Ok(Report {
        json,
        witness: None,
    })
}

/// Replays every bundled fixture.
pub fn paper_suite() -> Result<Report> {
    let mut fixtures_json = Vec::new();
    let (mut passed, mut failed, mut informational) = (0u64, 0u64, 0u64);
    for name in fixtures::NAMES {
        let scenario = fixtures::load(name)?;
        let v = replay_value(&scenario);
        match v["status"].as_str() {
            Some("pass") => passed += 1,
            Some("informational") => informational += 1,
            _ => failed += 1,
        }
        fixtures_json.push(v);
    }
    let json = json!({
        "command": "paper-suite",
        "fixtures": fixtures_json,
        "summary": {"passed": passed, "failed": failed, "informational": informational},
        "status": if failed == 0 { "pass" } else { "fail" },
    });
    Ok(Report {
        json,
        witness: None,
    })
}
