//! pbflow command-line front end.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use serde_json::json;

use pbflow::scenario::{fixtures, parse_scenario, run_command, Caps, Command, Config, Scenario};
use pbflow::strategy::{FsspVariant, ManipulationMode};
use pbflow::{Error, PreferenceModel};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Cmd {
    Shortlist,
    Allocate,
    EndToEnd,
    CheckAxiom,
    CheckSsp,
    CheckFssp,
    Replay,
    PaperSuite,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Shortlist => Command::Shortlist,
            Cmd::Allocate => Command::Allocate,
            Cmd::EndToEnd => Command::EndToEnd,
            Cmd::CheckAxiom => Command::CheckAxiom,
            Cmd::CheckSsp => Command::CheckSsp,
            Cmd::CheckFssp => Command::CheckFssp,
            Cmd::Replay => Command::Replay,
            Cmd::PaperSuite => Command::PaperSuite,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Model {
    Overlap,
    Cost,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Pessimistic,
    Optimistic,
    Anticipative,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Variant {
    Restricted,
    Unrestricted,
}

#[derive(Debug, Parser)]
#[command(name = "pbflow", version)]
#[command(
    about = "Two-stage participatory budgeting: shortlisting, allocation and strategyproofness checks"
)]
struct Cli {
    command: Cmd,

    /// Scenario document (JSON).
    scenario: Option<PathBuf>,

    /// Use a bundled scenario instead of a file.
    #[arg(long, conflicts_with = "scenario")]
    fixture: Option<String>,

    /// List the bundled scenarios and exit.
    #[arg(long)]
    list_fixtures: bool,

    /// Shortlisting rule: nomination, equal-representation or k-median.
    #[arg(long)]
    rule: Option<String>,

    /// Allocation rule: greedy-approval or approval-maximising.
    #[arg(long)]
    allocation: Option<String>,

    #[arg(long)]
    k: Option<u64>,

    /// euclidean or table.
    #[arg(long)]
    metric: Option<String>,

    #[arg(long, value_enum)]
    model: Option<Model>,

    #[arg(long, value_enum)]
    mode: Option<Mode>,

    #[arg(long, value_enum)]
    variant: Option<Variant>,

    /// Second-stage quantification: fixed-others, full or sampled.
    #[arg(long)]
    sp_mode: Option<String>,

    /// Check approximate rather than plain strategyproofness.
    #[arg(long)]
    approximate: bool,

    /// Manipulating agent, numbered from 1.
    #[arg(long)]
    agent: Option<usize>,

    /// Deviation as comma-separated project ids (empty for the empty set).
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    deviation: Option<Vec<u32>>,

    /// Restrict check-axiom to one axiom.
    #[arg(long)]
    axiom: Option<String>,

    /// Evaluate all six first-stage cells and their implications.
    #[arg(long)]
    table: bool,

    #[arg(long)]
    cap_ballot: Option<u64>,
    #[arg(long)]
    cap_profile: Option<u64>,
    #[arg(long)]
    cap_deviation: Option<u64>,
    #[arg(long)]
    cap_partition: Option<u64>,
    #[arg(long)]
    cap_representation: Option<u64>,
    #[arg(long)]
    cap_maximizer: Option<u64>,
    #[arg(long)]
    cap_sp_full: Option<u64>,
    #[arg(long)]
    cap_domination: Option<u64>,

    #[arg(long)]
    samples: Option<u64>,

    #[arg(long)]
    seed: Option<u64>,

    /// Write a replayable document for the reported counterexample.
    #[arg(long)]
    witness_out: Option<PathBuf>,

    /// Write the report here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,

    /// Add wall-clock timing to the report.
    #[arg(long)]
    timing: bool,
}

impl Cli {
    fn overrides(&self) -> Config {
        Config {
            shortlisting: self.rule.clone(),
            k: self.k,
            metric: self.metric.clone(),
            allocation: self.allocation.clone(),
            priority: None,
            model: self.model.map(|m| match m {
                Model::Overlap => PreferenceModel::Overlap,
                Model::Cost => PreferenceModel::Cost,
            }),
            mode: self.mode.map(|m| match m {
                Mode::Pessimistic => ManipulationMode::Pessimistic,
                Mode::Optimistic => ManipulationMode::Optimistic,
                Mode::Anticipative => ManipulationMode::Anticipative,
            }),
            variant: self.variant.map(|v| match v {
                Variant::Restricted => FsspVariant::Restricted,
                Variant::Unrestricted => FsspVariant::Unrestricted,
            }),
            sp_mode: self.sp_mode.clone(),
            approximate: self.approximate.then_some(true),
            agent: self.agent,
            deviation: self.deviation.clone(),
            axiom: self.axiom.clone(),
            table: self.table.then_some(true),
            caps: Caps {
                ballot: self.cap_ballot,
                profile: self.cap_profile,
                deviation: self.cap_deviation,
                partition: self.cap_partition,
                representation: self.cap_representation,
                maximizer: self.cap_maximizer,
                sp_full: self.cap_sp_full,
                domination: self.cap_domination,
            },
            samples: self.samples,
            seed: self.seed,
        }
    }

    fn scenario(&self) -> Result<Scenario, Error> {
        match (&self.scenario, &self.fixture) {
            (Some(path), _) => parse_scenario(path),
            (None, Some(name)) => fixtures::load(name),
            (None, None) => Err(Error::invalid("give a scenario file or --fixture NAME")),
        }
    }
}

fn exit_code(e: &Error) -> ExitCode {
    match e {
        Error::ResourceLimit { .. } => ExitCode::from(3),
        _ => ExitCode::from(2),
    }
}

fn write(path: &PathBuf, text: &str) -> Result<(), Error> {
    std::fs::write(path, text)
        .map_err(|e| Error::invalid(format!("cannot write {}: {e}", path.display())))
}

fn run(cli: &Cli) -> Result<(), Error> {
    let command = Command::from(cli.command);
    let start = Instant::now();
    let mut report = if command == Command::PaperSuite {
        pbflow::scenario::paper_suite()?
    } else {
        run_command(command, &cli.scenario()?, &cli.overrides())?
    };
    if cli.timing {
        report.json["timing_ms"] = json!(start.elapsed().as_secs_f64() * 1e3);
    }
    if let Some(path) = &cli.witness_out {
        match &report.witness {
            Some(doc) => write(path, &doc.to_json())?,
            None => eprintln!("no counterexample to write"),
        }
    }
    let text = report.to_pretty();
    match &cli.output {
        Some(path) => write(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list_fixtures {
        for name in fixtures::NAMES {
            println!("{name}");
        }
        return ExitCode::SUCCESS;
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
