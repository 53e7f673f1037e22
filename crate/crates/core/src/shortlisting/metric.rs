use crate::error::{Error, Result};
use crate::model::{Instance, ProjectId};

/// Tolerance used when comparing distances and distance sums.
pub const DISTANCE_EPS: f64 = 1e-9;

/// A finite metric over the projects of one instance, indexed by position.
#[derive(Clone, Debug, PartialEq)]
pub struct Metric {
    size: usize,
    dist: Vec<f64>,
}

impl Metric {
    /// Euclidean distance between project coordinates.
    pub fn euclidean(instance: &Instance) -> Result<Self> {
        let coords: Vec<&Vec<f64>> = instance
            .projects()
            .iter()
            .map(|p| {
                p.coords
                    .as_ref()
                    .ok_or_else(|| Error::Metric(format!("{} has no coordinates", p.id)))
            })
            .collect::<Result<_>>()?;
        if let Some(first) = coords.first() {
            if coords.iter().any(|c| c.len() != first.len()) {
                return Err(Error::Metric(
                    "coordinates have differing dimensions".into(),
                ));
            }
        }
        let size = coords.len();
        let mut dist = vec![0.0; size * size];
        for a in 0..size {
            for b in (a + 1)..size {
                let d = coords[a]
                    .iter()
                    .zip(coords[b])
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt();
                dist[a * size + b] = d;
                dist[b * size + a] = d;
            }
        }
        let metric = Metric { size, dist };
        metric.validate(instance)?;
        Ok(metric)
    }

    /// A metric given as a list of pairwise distances. Every unordered pair
    /// of distinct projects must be listed; listing both orientations is
    /// allowed as long as they agree.
    pub fn from_table(
        instance: &Instance,
        entries: &[(ProjectId, ProjectId, f64)],
    ) -> Result<Self> {
        let size = instance.len();
        let mut dist = vec![f64::NAN; size * size];
        for a in 0..size {
            dist[a * size + a] = 0.0;
        }
        for &(x, y, d) in entries {
            let (a, b) = match (instance.position(x), instance.position(y)) {
                (Some(a), Some(b)) => (a, b),
                _ => {
                    return Err(Error::Metric(format!(
                        "distance between unknown projects {x}, {y}"
                    )))
                }
            };
            let forward = &mut dist[a * size + b];
            if !forward.is_nan() && (*forward - d).abs() > DISTANCE_EPS {
                return Err(Error::Metric(format!(
                    "asymmetric or conflicting distance for {x}, {y}"
                )));
            }
            *forward = d;
            let backward = &mut dist[b * size + a];
            if !backward.is_nan() && (*backward - d).abs() > DISTANCE_EPS {
                return Err(Error::Metric(format!(
                    "asymmetric or conflicting distance for {x}, {y}"
                )));
            }
            *backward = d;
        }
        if let Some(i) = dist.iter().position(|d| d.is_nan()) {
            return Err(Error::Metric(format!(
                "missing distance between {} and {}",
                instance.id(i / size),
                instance.id(i % size)
            )));
        }
        let metric = Metric { size, dist };
        metric.validate(instance)?;
        Ok(metric)
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        self.dist[a * self.size + b]
    }

    fn validate(&self, instance: &Instance) -> Result<()> {
        let n = self.size;
        let name = |p: usize| instance.id(p);
        for a in 0..n {
            if self.distance(a, a) != 0.0 {
                return Err(Error::Metric(format!(
                    "{} has nonzero distance to itself",
                    name(a)
                )));
            }
            for b in 0..n {
                let d = self.distance(a, b);
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::Metric(format!(
                        "distance between {} and {} is not a nonnegative number",
                        name(a),
                        name(b)
                    )));
                }
                if a != b && d <= DISTANCE_EPS {
                    return Err(Error::Metric(format!(
                        "{} and {} are distinct but at distance 0",
                        name(a),
                        name(b)
                    )));
                }
                if (d - self.distance(b, a)).abs() > DISTANCE_EPS {
                    return Err(Error::Metric(format!(
                        "distance between {} and {} is not symmetric",
                        name(a),
                        name(b)
                    )));
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if self.distance(a, c)
                        > self.distance(a, b) + self.distance(b, c) + DISTANCE_EPS
                    {
                        return Err(Error::Metric(format!(
                            "triangle inequality fails for {}, {}, {}",
                            name(a),
                            name(b),
                            name(c)
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}
