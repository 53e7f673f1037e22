//! Two-stage participatory budgeting: shortlisting rules, allocation rules,
//! axiom checkers and strategyproofness analysis.

pub mod allocation;
pub mod error;
pub mod greedy;
pub mod model;
pub mod preferences;
pub mod scenario;
pub mod shortlisting;
pub mod strategy;
pub mod tiebreak;
pub mod verification;

pub use allocation::{
    approval_scores, AllocationRule, ApprovalMaximising, ApprovalProfile, ApprovalScores,
    GreedyApproval, TieBreakPolicy,
};
pub use error::{Error, Result};
pub use greedy::{greedy, greedy_select};
pub use model::{
    pid, AllocationInstance, AllocationStatus, Instance, Project, ProjectId, ProjectSet,
};
pub use preferences::{best_allocations, ideal_set, Agent, PreferenceModel, PreferenceOrder};
pub use shortlisting::{Nomination, ShortlistingProfile, ShortlistingRule};
