//! Scenario documents, command execution and the bundled fixtures.

mod document;
pub mod fixtures;
mod run;

pub use document::{
    instance_document, parse_scenario, AgentDoc, Caps, Config, Expectation, Informational,
    InstanceDoc, ProjectDoc, Scenario, ScenarioDocument, FORMAT_VERSION,
};
pub use run::{
    evaluate_expectation, lookup, paper_suite, run_command, values_match, Command, Report,
};
