//! Shared by the integration tests and the acceptance target.
#![allow(dead_code)]

pub mod oracles;
pub mod suites;

use std::fmt;

/// Outcome of one seeded or exhaustive suite.
#[derive(Debug, Default)]
pub struct SuiteResult {
    pub cases: u64,
    /// One line per failing case; the first few are kept.
    pub failures: Vec<String>,
    pub failure_count: u64,
}

impl SuiteResult {
    const KEEP: usize = 5;

    pub fn case(&mut self) {
        self.cases += 1;
    }

    pub fn fail(&mut self, what: impl Into<String>) {
        self.failure_count += 1;
        if self.failures.len() < Self::KEEP {
            self.failures.push(what.into());
        }
    }

    pub fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.case();
        if !ok {
            self.fail(what());
        }
    }

    pub fn passed(&self) -> bool {
        self.failure_count == 0 && self.cases > 0
    }

    pub fn merge(&mut self, other: SuiteResult) {
        self.cases += other.cases;
        self.failure_count += other.failure_count;
        for f in other.failures {
            if self.failures.len() < Self::KEEP {
                self.failures.push(f);
            }
        }
    }
}

impl fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} cases, {} failures", self.cases, self.failure_count)?;
        for line in &self.failures {
            write!(f, "\n    {line}")?;
        }
        Ok(())
    }
}
