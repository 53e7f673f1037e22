//! Median-based shortlisting: cluster the proposed projects into a
//! (k, l)-Voronoi partition with the smallest possible l and shortlist the
//! cluster medians.
//!
//! Search is an exact enumeration of set partitions, so it is capped.

use std::collections::HashMap;

use super::metric::{Metric, DISTANCE_EPS};
use super::{ShortlistingProfile, ShortlistingRule};
use crate::error::{Error, Result};
use crate::model::{Instance, ProjectSet};
use crate::tiebreak::tiebreak_sets;

/// Project minimising the summed distance to the rest of `set`; ties go to
/// the lowest index.
pub fn geometric_median(set: ProjectSet, metric: &Metric) -> Result<usize> {
    if set.is_empty() {
        return Err(Error::invalid("geometric median of an empty set"));
    }
    let sums: Vec<(usize, f64)> = set
        .iter()
        .map(|c| (c, set.iter().map(|o| metric.distance(c, o)).sum()))
        .collect();
    let min = sums.iter().map(|&(_, s)| s).fold(f64::INFINITY, f64::min);
    Ok(sums
        .iter()
        .find(|&&(_, s)| s <= min + DISTANCE_EPS)
        .map(|&(c, _)| c)
        .expect("nonempty"))
}

#[derive(Clone, Debug, PartialEq)]
pub struct VoronoiPartition {
    pub clusters: Vec<ProjectSet>,
    pub medians: Vec<usize>,
}

impl VoronoiPartition {
    pub fn median_set(&self) -> ProjectSet {
        ProjectSet::from_positions(self.medians.iter().copied())
    }

    /// Largest distance between a project and its cluster's median.
    pub fn radius(&self, metric: &Metric) -> f64 {
        self.clusters
            .iter()
            .zip(&self.medians)
            .flat_map(|(c, &m)| c.iter().map(move |p| metric.distance(p, m)))
            .fold(0.0, f64::max)
    }

    /// Checks every (k, l)-Voronoi condition, including that the stored
    /// medians are the geometric medians of their clusters.
    pub fn is_valid(&self, instance: &Instance, metric: &Metric, k: u64, ell: f64) -> bool {
        if self.clusters.len() != self.medians.len() {
            return false;
        }
        for (c, &m) in self.clusters.iter().zip(&self.medians) {
            if geometric_median(*c, metric).ok() != Some(m) {
                return false;
            }
        }
        let cost: u64 = self.medians.iter().map(|&m| instance.cost(m)).sum();
        if cost > k.saturating_mul(instance.budget()) {
            return false;
        }
        voronoi_ok(&self.clusters, &self.medians, metric)
            && self.radius(metric) <= ell + DISTANCE_EPS
    }
}

fn voronoi_ok(clusters: &[ProjectSet], medians: &[usize], metric: &Metric) -> bool {
    clusters.iter().zip(medians).all(|(c, &own)| {
        c.iter().all(|p| {
            let d = metric.distance(p, own);
            medians
                .iter()
                .all(|&m| d <= metric.distance(p, m) + DISTANCE_EPS)
        })
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct KMedianOutcome {
    pub shortlist: ProjectSet,
    /// The minimal admissible l.
    pub ell: f64,
    /// Every admissible partition at that l whose median set is the shortlist.
    pub partitions: Vec<VoronoiPartition>,
}

struct PartitionSearch<'a> {
    instance: &'a Instance,
    metric: &'a Metric,
    limit: u64,
    min_cost: u64,
    elements: Vec<usize>,
    clusters: Vec<ProjectSet>,
    medians: HashMap<u64, usize>,
    best_ell: f64,
    found: Vec<(f64, VoronoiPartition)>,
}

impl PartitionSearch<'_> {
    fn median(&mut self, cluster: ProjectSet) -> usize {
        let metric = self.metric;
        *self
            .medians
            .entry(cluster.bits())
            .or_insert_with(|| geometric_median(cluster, metric).expect("clusters are nonempty"))
    }

    fn assign(&mut self, j: usize) {
        if self.clusters.len() as u64 * self.min_cost > self.limit {
            return;
        }
        if j == self.elements.len() {
            self.evaluate();
            return;
        }
        let pos = self.elements[j];
        for c in 0..self.clusters.len() {
            let before = self.clusters[c];
            self.clusters[c] = before.with(pos);
            self.assign(j + 1);
            self.clusters[c] = before;
        }
        self.clusters.push(ProjectSet::singleton(pos));
        self.assign(j + 1);
        self.clusters.pop();
    }

    fn evaluate(&mut self) {
        let clusters = self.clusters.clone();
        let medians: Vec<usize> = clusters.iter().map(|&c| self.median(c)).collect();
        let cost: u64 = medians.iter().map(|&m| self.instance.cost(m)).sum();
        if cost > self.limit || !voronoi_ok(&clusters, &medians, self.metric) {
            return;
        }
        let partition = VoronoiPartition { clusters, medians };
        let ell = partition.radius(self.metric);
        if ell > self.best_ell + DISTANCE_EPS {
            return;
        }
        if ell < self.best_ell - DISTANCE_EPS {
            self.best_ell = ell;
            let bound = ell + DISTANCE_EPS;
            self.found.retain(|(e, _)| *e <= bound);
        } else if ell < self.best_ell {
            self.best_ell = ell;
        }
        self.found.push((ell, partition));
    }
}

fn search(
    instance: &Instance,
    union: ProjectSet,
    metric: &Metric,
    k: u64,
    cap: usize,
) -> Result<KMedianOutcome> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if metric.len() != instance.len() {
        return Err(Error::invalid("metric does not match the instance"));
    }
    Error::check_cap(
        "number of projects to partition",
        union.len() as u64,
        cap as u64,
    )?;
    if union.is_empty() {
        return Ok(KMedianOutcome {
            shortlist: ProjectSet::EMPTY,
            ell: 0.0,
            partitions: vec![VoronoiPartition {
                clusters: vec![],
                medians: vec![],
            }],
        });
    }
    let mut s = PartitionSearch {
        instance,
        metric,
        limit: k.saturating_mul(instance.budget()),
        min_cost: union.iter().map(|p| instance.cost(p)).min().unwrap_or(1),
        elements: union.iter().collect(),
        clusters: Vec::new(),
        medians: HashMap::new(),
        best_ell: f64::INFINITY,
        found: Vec::new(),
    };
    s.assign(0);
    if s.found.is_empty() {
        return Err(Error::NoPartition);
    }
    let ell = s.best_ell;
    let admissible: Vec<VoronoiPartition> = s
        .found
        .into_iter()
        .filter(|(e, _)| *e <= ell + DISTANCE_EPS)
        .map(|(_, p)| p)
        .collect();
    let shortlist =
        tiebreak_sets(admissible.iter().map(VoronoiPartition::median_set)).expect("nonempty");
    let partitions = admissible
        .into_iter()
        .filter(|p| p.median_set() == shortlist)
        .collect();
    Ok(KMedianOutcome {
        shortlist,
        ell,
        partitions,
    })
}

/// Smallest l for which `set` admits a (k, l)-Voronoi partition.
pub fn minimal_ell(set: ProjectSet, metric: &Metric, k: u64, instance: &Instance) -> Result<f64> {
    search(instance, set, metric, k, KMedian::DEFAULT_CAP).map(|o| o.ell)
}

/// Full k-median evaluation, including the partitions behind the shortlist.
pub fn k_median(
    instance: &Instance,
    profile: &ShortlistingProfile,
    k: u64,
    metric: &Metric,
    cap: usize,
) -> Result<KMedianOutcome> {
    search(instance, profile.union(), metric, k, cap)
}

/// The k-median shortlisting rule for a fixed metric.
#[derive(Clone, Debug)]
pub struct KMedian {
    pub k: u64,
    pub metric: Metric,
    pub cap: usize,
}

impl KMedian {
    pub const DEFAULT_CAP: usize = 12;

    pub fn new(k: u64, metric: Metric) -> Self {
        KMedian {
            k,
            metric,
            cap: Self::DEFAULT_CAP,
        }
    }
}

impl ShortlistingRule for KMedian {
    fn name(&self) -> String {
        format!("{}-median", self.k)
    }

    fn shortlist(&self, instance: &Instance, profile: &ShortlistingProfile) -> Result<ProjectSet> {
        k_median(instance, profile, self.k, &self.metric, self.cap).map(|o| o.shortlist)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{pid, Project};

    /// Seven projects placed as in the median counterexample figure.
    fn figure() -> (Instance, Metric) {
        let r3 = 3f64.sqrt();
        let coords = [
            (0.0, 1.0),
            (0.0, -1.0),
            (-r3, 0.0),
            (-1.0 / r3, 0.0),
            (4.0, 0.0),
            (4.0, 1.0),
            (4.0, -1.0),
        ];
        let projects = coords
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| Project::new(pid(i as u32 + 1), 1).with_coords(vec![x, y]))
            .collect();
        let inst = Instance::new(projects, 3).unwrap();
        let metric = Metric::euclidean(&inst).unwrap();
        (inst, metric)
    }

    #[test]
    fn figure_distances_match_the_labels() {
        let (_, m) = figure();
        assert!((m.distance(0, 1) - 2.0).abs() < 1e-12);
        assert!((m.distance(0, 2) - 2.0).abs() < 1e-12);
        assert!((m.distance(2, 3) - 2.0 / 3f64.sqrt()).abs() < 1e-12);
        assert!((m.distance(0, 4) - 17f64.sqrt()).abs() < 1e-12);
        assert!((m.distance(0, 5) - 4.0).abs() < 1e-12);
        assert!((m.distance(4, 5) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn geometric_median_examples() {
        let (inst, m) = figure();
        let s = |v: &[u32]| inst.set_of_indices(v).unwrap();
        assert_eq!(geometric_median(s(&[5, 6, 7]), &m).unwrap(), 4);
        assert_eq!(geometric_median(s(&[2, 4]), &m).unwrap(), 1);
        assert_eq!(geometric_median(s(&[3]), &m).unwrap(), 2);
        assert!(geometric_median(ProjectSet::EMPTY, &m).is_err());
    }

    #[test]
    fn truthful_and_manipulated_shortlists() {
        let (inst, m) = figure();
        let s = |v: &[u32]| inst.set_of_indices(v).unwrap();
        let truthful = ShortlistingProfile::new(vec![s(&[1, 2, 3]), s(&[4, 6, 7])]);
        let out = k_median(&inst, &truthful, 1, &m, 12).unwrap();
        assert_eq!(out.shortlist, s(&[4, 6, 7]));
        assert!((out.ell - 2.0 / 3f64.sqrt()).abs() < 1e-9);
        assert_eq!(out.partitions.len(), 1);
        assert_eq!(
            out.partitions[0].clusters,
            vec![s(&[1, 2, 3, 4]), s(&[6]), s(&[7])]
        );

        let manipulated = ShortlistingProfile::new(vec![s(&[1, 2, 5]), s(&[4, 6, 7])]);
        let out = k_median(&inst, &manipulated, 1, &m, 12).unwrap();
        assert_eq!(out.shortlist, s(&[1, 2, 5]));
        for p in &out.partitions {
            assert!(p.is_valid(&inst, &m, 1, out.ell));
        }
    }

    #[test]
    fn trivial_cases() {
        let (inst, m) = figure();
        let single = ShortlistingProfile::new(vec![ProjectSet::singleton(2)]);
        let out = k_median(&inst, &single, 1, &m, 12).unwrap();
        assert_eq!(out.shortlist, ProjectSet::singleton(2));
        assert_eq!(out.ell, 0.0);
        assert_eq!(
            minimal_ell(ProjectSet::singleton(5), &m, 1, &inst).unwrap(),
            0.0
        );
    }

    #[test]
    fn cap_is_enforced() {
        let (inst, m) = figure();
        let all = ShortlistingProfile::new(vec![inst.all()]);
        assert!(matches!(
            k_median(&inst, &all, 1, &m, 6),
            Err(Error::ResourceLimit { .. })
        ));
    }
}
