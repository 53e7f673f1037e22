//! First-stage shortlisting rules.

mod equal_representation;
mod median;
mod metric;

pub use equal_representation::{representation_score, EqualRepresentation, RepresentationScore};
pub use median::{
    geometric_median, k_median, minimal_ell, KMedian, KMedianOutcome, VoronoiPartition,
};
pub use metric::{Metric, DISTANCE_EPS};

use crate::error::Result;
use crate::model::{Instance, ProjectSet};

/// One proposal set per agent.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ShortlistingProfile(pub Vec<ProjectSet>);

impl ShortlistingProfile {
    pub fn new(proposals: Vec<ProjectSet>) -> Self {
        ShortlistingProfile(proposals)
    }

    pub fn proposals(&self) -> &[ProjectSet] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Every proposed project.
    pub fn union(&self) -> ProjectSet {
        self.0
            .iter()
            .fold(ProjectSet::EMPTY, |acc, &p| acc.union(p))
    }

    pub fn with_proposal(&self, agent: usize, proposal: ProjectSet) -> Self {
        let mut proposals = self.0.clone();
        proposals[agent] = proposal;
        ShortlistingProfile(proposals)
    }
}

/// Maps a shortlisting instance and profile to a subset of the proposed projects.
pub trait ShortlistingRule: Send + Sync {
    fn name(&self) -> String;

    fn shortlist(&self, instance: &Instance, profile: &ShortlistingProfile) -> Result<ProjectSet>;
}

/// Shortlists every proposed project.
#[derive(Clone, Copy, Debug, Default)]
pub struct Nomination;

impl ShortlistingRule for Nomination {
    fn name(&self) -> String {
        "nomination".into()
    }

    fn shortlist(&self, _instance: &Instance, profile: &ShortlistingProfile) -> Result<ProjectSet> {
        Ok(nomination(profile))
    }
}

pub fn nomination(profile: &ShortlistingProfile) -> ProjectSet {
    profile.union()
}
