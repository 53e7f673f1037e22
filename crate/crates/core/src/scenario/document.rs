//! The scenario document: one JSON format for instances, profiles, rule
//! configuration, recorded expectations and replayable witnesses.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::allocation::ApprovalProfile;
use crate::error::{Error, Result};
use crate::model::{pid, Instance, Project, ProjectId, ProjectSet};
use crate::preferences::{Agent, PreferenceModel, PreferenceOrder};
use crate::shortlisting::{Metric, ShortlistingProfile};
use crate::strategy::{FsspVariant, ManipulationMode};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    pub version: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub instance: InstanceDoc,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub agents: Vec<AgentDoc>,
    /// Shortlisting profile; agents' truthful proposals when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proposals: Option<Vec<Vec<u32>>>,
    /// Fixed shortlist for the allocation stage; computed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shortlist: Option<Vec<u32>>,
    /// Approval profile; agents' ideal sets within the shortlist when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ballots: Option<Vec<Vec<u32>>>,
    #[serde(default, skip_serializing_if = "Config::is_empty")]
    pub config: Config,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub expectations: Vec<Expectation>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub budget: u64,
    pub projects: Vec<ProjectDoc>,
    /// Explicit distance table as `[a, b, distance]` triples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distances: Option<Vec<(u32, u32, f64)>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectDoc {
    pub id: u32,
    pub cost: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentDoc {
    /// Most preferred first. A prefix is completed by the remaining
    /// projects in ascending index order.
    pub ranking: Vec<u32>,
    /// Projects the agent can conceive of; every project when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub awareness: Option<Vec<u32>>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Caps {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ballot: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deviation: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub representation: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maximizer: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sp_full: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domination: Option<u64>,
}

impl Caps {
    fn is_empty(&self) -> bool {
        *self == Caps::default()
    }

    fn merged(&self, over: &Caps) -> Caps {
        Caps {
            ballot: over.ballot.or(self.ballot),
            profile: over.profile.or(self.profile),
            deviation: over.deviation.or(self.deviation),
            partition: over.partition.or(self.partition),
            representation: over.representation.or(self.representation),
            maximizer: over.maximizer.or(self.maximizer),
            sp_full: over.sp_full.or(self.sp_full),
            domination: over.domination.or(self.domination),
        }
    }
}

/// Rule and checker configuration. Every field is optional; command-line
/// flags and expectation overrides are merged on top of the document's.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shortlisting: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub allocation: Option<String>,
    /// Explicit priority list for approval-maximising ties.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub priority: Option<Vec<Vec<u32>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<PreferenceModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<ManipulationMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<FsspVariant>,
    /// Second-stage quantification: fixed-others, full or sampled.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sp_mode: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub approximate: Option<bool>,
    /// Manipulating agent, 1-based.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deviation: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axiom: Option<String>,
    /// Evaluate all six first-stage cells and their implications.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<bool>,
    #[serde(default, skip_serializing_if = "Caps::is_empty")]
    pub caps: Caps,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Config {
    pub fn is_empty(&self) -> bool {
        *self == Config::default()
    }

    /// `over` wins wherever it sets a field.
    pub fn merged(&self, over: &Config) -> Config {
        Config {
            shortlisting: over
                .shortlisting
                .clone()
                .or_else(|| self.shortlisting.clone()),
            k: over.k.or(self.k),
            metric: over.metric.clone().or_else(|| self.metric.clone()),
            allocation: over.allocation.clone().or_else(|| self.allocation.clone()),
            priority: over.priority.clone().or_else(|| self.priority.clone()),
            model: over.model.or(self.model),
            mode: over.mode.or(self.mode),
            variant: over.variant.or(self.variant),
            sp_mode: over.sp_mode.clone().or_else(|| self.sp_mode.clone()),
            approximate: over.approximate.or(self.approximate),
            agent: over.agent.or(self.agent),
            deviation: over.deviation.clone().or_else(|| self.deviation.clone()),
            axiom: over.axiom.clone().or_else(|| self.axiom.clone()),
            table: over.table.or(self.table),
            caps: self.caps.merged(&over.caps),
            samples: over.samples.or(self.samples),
            seed: over.seed.or(self.seed),
        }
    }
}

/// A recorded result: running `command` with the document's configuration
/// plus `config` must produce `expect` at the given report paths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    pub label: String,
    pub command: String,
    #[serde(default, skip_serializing_if = "Config::is_empty")]
    pub config: Config,
    /// Dotted report path to expected value.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub expect: BTreeMap<String, Value>,
    /// A claim that is reported next to the computed value but not enforced.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub informational: Option<Informational>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Informational {
    pub note: String,
    pub claimed: BTreeMap<String, Value>,
}

/// A validated document with every id resolved.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub document: ScenarioDocument,
    pub instance: Instance,
    pub agents: Vec<Agent>,
    pub proposals: Option<ShortlistingProfile>,
    pub shortlist: Option<ProjectSet>,
    pub ballots: Option<ApprovalProfile>,
    pub distances: Option<Metric>,
}

impl ScenarioDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents serialize");
        s.push('\n');
        s
    }
}

pub fn parse_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))?;
    Scenario::from_json(&text)
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        Scenario::new(ScenarioDocument::from_json(text)?)
    }

    pub fn new(document: ScenarioDocument) -> Result<Self> {
        if document.version != FORMAT_VERSION {
            return Err(Error::invalid(format!(
                "unsupported format version {} (expected {FORMAT_VERSION})",
                document.version
            )));
        }
        let mut projects = Vec::with_capacity(document.instance.projects.len());
        for p in &document.instance.projects {
            let id = ProjectId::new(p.id)?;
            let mut project = Project::new(id, p.cost);
            project.coords = p.coords.clone();
            projects.push(project);
        }
        let instance = Instance::new(projects, document.instance.budget)?;
        let set = |what: &str, ids: &[u32]| -> Result<ProjectSet> { id_set(&instance, what, ids) };

        let mut agents = Vec::with_capacity(document.agents.len());
        for (i, a) in document.agents.iter().enumerate() {
            let what = format!("ranking of agent {}", i + 1);
            let ranking = a
                .ranking
                .iter()
                .map(|&x| resolve(&instance, &what, x).map(|_| pid(x)))
                .collect::<Result<Vec<_>>>()?;
            let order = PreferenceOrder::with_prefix(&instance, &ranking)
                .map_err(|e| Error::invalid(format!("{what}: {e}")))?;
            let awareness = match &a.awareness {
                Some(ids) => set(&format!("awareness of agent {}", i + 1), ids)?,
                None => instance.all(),
            };
            agents.push(Agent::new(order, awareness));
        }

        let profile_len = |what: &str, len: usize| -> Result<()> {
            if !agents.is_empty() && len != agents.len() {
                return Err(Error::invalid(format!(
                    "{what} has {len} entries but there are {} agents",
                    agents.len()
                )));
            }
            Ok(())
        };
        let proposals = match &document.proposals {
            Some(list) => {
                profile_len("proposals", list.len())?;
                let sets = list
                    .iter()
                    .enumerate()
                    .map(|(i, p)| set(&format!("proposal of agent {}", i + 1), p))
                    .collect::<Result<Vec<_>>>()?;
                Some(ShortlistingProfile::new(sets))
            }
            None => None,
        };
        let shortlist = document
            .shortlist
            .as_ref()
            .map(|s| set("shortlist", s))
            .transpose()?;
        let ballots = match &document.ballots {
            Some(list) => {
                profile_len("ballots", list.len())?;
                let sets = list
                    .iter()
                    .enumerate()
                    .map(|(i, b)| set(&format!("ballot of agent {}", i + 1), b))
                    .collect::<Result<Vec<_>>>()?;
                if let Some(s) = shortlist {
                    if let Some(i) = sets.iter().position(|b| !b.is_subset(s)) {
                        return Err(Error::invalid(format!(
                            "ballot of agent {} approves projects outside the shortlist",
                            i + 1
                        )));
                    }
                }
                Some(ApprovalProfile::new(sets))
            }
            None => None,
        };
        let distances = match &document.instance.distances {
            Some(table) => {
                for &(a, b, _) in table {
                    resolve(&instance, "distance table", a)?;
                    resolve(&instance, "distance table", b)?;
                }
                let entries: Vec<_> = table.iter().map(|&(a, b, d)| (pid(a), pid(b), d)).collect();
                Some(Metric::from_table(&instance, &entries)?)
            }
            None => None,
        };
        Ok(Scenario {
            document,
            instance,
            agents,
            proposals,
            shortlist,
            ballots,
            distances,
        })
    }

    pub fn set(&self, what: &str, ids: &[u32]) -> Result<ProjectSet> {
        id_set(&self.instance, what, ids)
    }

    /// Ids of `set`, ascending.
    pub fn ids(&self, set: ProjectSet) -> Vec<u32> {
        self.instance.indices(set)
    }
}

fn resolve(instance: &Instance, what: &str, id: u32) -> Result<usize> {
    ProjectId::new(id)
        .ok()
        .and_then(|p| instance.position(p))
        .ok_or_else(|| Error::invalid(format!("{what} refers to unknown project p{id}")))
}

fn id_set(instance: &Instance, what: &str, ids: &[u32]) -> Result<ProjectSet> {
    let mut set = ProjectSet::EMPTY;
    for &id in ids {
        set.insert(resolve(instance, what, id)?);
    }
    Ok(set)
}

/// Document describing `instance` with no agents or configuration.
pub fn instance_document(name: &str, instance: &Instance) -> ScenarioDocument {
    ScenarioDocument {
        version: FORMAT_VERSION,
        name: name.into(),
        description: String::new(),
        instance: InstanceDoc {
            budget: instance.budget(),
            projects: instance
                .projects()
                .iter()
                .map(|p| ProjectDoc {
                    id: p.id.index(),
                    cost: p.cost,
                    coords: p.coords.clone(),
                })
                .collect(),
            distances: None,
        },
        agents: vec![],
        proposals: None,
        shortlist: None,
        ballots: None,
        config: Config::default(),
        expectations: vec![],
    }
}
