//! Python bindings: instances, the shortlisting and allocation rules, and the
//! scenario runner. Reports come back as plain Python dictionaries.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

use pbflow::scenario::{self, fixtures, Command, Config};
use pbflow::shortlisting::{EqualRepresentation, KMedian, Metric};
use pbflow::{
    AllocationInstance, AllocationRule, ApprovalMaximising, ApprovalProfile, Error, GreedyApproval,
    Nomination, PreferenceModel, PreferenceOrder, Project, ProjectSet, ShortlistingProfile,
    ShortlistingRule,
};

create_exception!(pbflow_py, PbflowError, PyException);
create_exception!(pbflow_py, ResourceLimitError, PbflowError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::ResourceLimit { .. } => ResourceLimitError::new_err(e.to_string()),
        Error::InvalidInput(_) | Error::Parse { .. } | Error::Metric(_) => {
            PyValueError::new_err(e.to_string())
        }
        Error::NoPartition => PbflowError::new_err(e.to_string()),
    }
}

/// A project universe with costs, budget and optional coordinates.
#[pyclass(module = "pbflow_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct Instance {
    inner: pbflow::Instance,
}

impl Instance {
    fn set(&self, ids: &[u32]) -> PyResult<ProjectSet> {
        self.inner.set_of_indices(ids).map_err(to_py)
    }

    fn ids(&self, set: ProjectSet) -> Vec<u32> {
        self.inner.indices(set)
    }

    fn profile(&self, sets: &[Vec<u32>]) -> PyResult<Vec<ProjectSet>> {
        sets.iter().map(|s| self.set(s)).collect()
    }
}

#[pymethods]
impl Instance {
    /// Projects get ids 1..=len(costs) unless `ids` is given.
    #[new]
    #[pyo3(signature = (costs, budget, ids=None, coords=None))]
    fn new(
        costs: Vec<u64>,
        budget: u64,
        ids: Option<Vec<u32>>,
        coords: Option<Vec<Vec<f64>>>,
    ) -> PyResult<Self> {
        let ids = ids.unwrap_or_else(|| (1..=costs.len() as u32).collect());
        if ids.len() != costs.len() {
            return Err(PyValueError::new_err("ids and costs differ in length"));
        }
        if coords.as_ref().is_some_and(|c| c.len() != costs.len()) {
            return Err(PyValueError::new_err("coords and costs differ in length"));
        }
        let mut projects = Vec::with_capacity(costs.len());
        for (i, (&id, &cost)) in ids.iter().zip(&costs).enumerate() {
            let mut p = Project::new(pbflow::ProjectId::new(id).map_err(to_py)?, cost);
            if let Some(c) = &coords {
                p = p.with_coords(c[i].clone());
            }
            projects.push(p);
        }
        let inner = pbflow::Instance::new(projects, budget).map_err(to_py)?;
        Ok(Instance { inner })
    }

    #[getter]
    fn budget(&self) -> u64 {
        self.inner.budget()
    }

    #[getter]
    fn project_ids(&self) -> Vec<u32> {
        self.ids(self.inner.all())
    }

    fn cost(&self, ids: Vec<u32>) -> PyResult<u64> {
        Ok(self.inner.total_cost(self.set(&ids)?))
    }

    /// Greedy selection along `ranking` (a prefix is completed by ascending id)
    /// restricted to `available`.
    #[pyo3(signature = (ranking, available=None))]
    fn ideal_set(&self, ranking: Vec<u32>, available: Option<Vec<u32>>) -> PyResult<Vec<u32>> {
        let ranking: Vec<_> = ranking.into_iter().map(pbflow::pid).collect();
        let order = PreferenceOrder::with_prefix(&self.inner, &ranking).map_err(to_py)?;
        let available = match available {
            Some(a) => self.set(&a)?,
            None => self.inner.all(),
        };
        Ok(self.ids(pbflow::ideal_set(&self.inner, &order, available)))
    }

    /// Runs a shortlisting rule: "nomination", "equal-representation" or
    /// "k-median" (Euclidean over the coordinates).
    #[pyo3(signature = (proposals, rule="nomination", k=1))]
    fn shortlist(&self, proposals: Vec<Vec<u32>>, rule: &str, k: u64) -> PyResult<Vec<u32>> {
        let profile = ShortlistingProfile::new(self.profile(&proposals)?);
        let rule: Box<dyn ShortlistingRule> = match rule {
            "nomination" => Box::new(Nomination),
            "equal-representation" => Box::new(EqualRepresentation::new(k)),
            "k-median" => Box::new(KMedian::new(
                k,
                Metric::euclidean(&self.inner).map_err(to_py)?,
            )),
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown shortlisting rule `{other}`"
                )))
            }
        };
        Ok(self.ids(rule.shortlist(&self.inner, &profile).map_err(to_py)?))
    }

    /// Runs an allocation rule: "greedy-approval" or "approval-maximising".
    #[pyo3(signature = (shortlist, ballots, rule="greedy-approval"))]
    fn allocate(
        &self,
        shortlist: Vec<u32>,
        ballots: Vec<Vec<u32>>,
        rule: &str,
    ) -> PyResult<Vec<u32>> {
        let inst = AllocationInstance::new(&self.inner, self.set(&shortlist)?).map_err(to_py)?;
        let profile = ApprovalProfile::new(self.profile(&ballots)?);
        let rule: Box<dyn AllocationRule> = match rule {
            "greedy-approval" => Box::new(GreedyApproval),
            "approval-maximising" => Box::new(ApprovalMaximising::default()),
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown allocation rule `{other}`"
                )))
            }
        };
        Ok(self.ids(rule.allocate(&inst, &profile).map_err(to_py)?))
    }

    /// Value of `allocation` to an agent whose ideal set is `ideal`.
    #[pyo3(signature = (ideal, allocation, model="overlap"))]
    fn value(&self, ideal: Vec<u32>, allocation: Vec<u32>, model: &str) -> PyResult<u64> {
        let model = match model {
            "overlap" => PreferenceModel::Overlap,
            "cost" => PreferenceModel::Cost,
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown preference model `{other}`"
                )))
            }
        };
        Ok(model.value(&self.inner, self.set(&ideal)?, self.set(&allocation)?))
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance({} projects, budget {})",
            self.inner.len(),
            self.inner.budget()
        )
    }
}

fn loads(py: Python<'_>, text: &str) -> PyResult<Py<PyAny>> {
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

/// A validated scenario document.
#[pyclass(module = "pbflow_py", frozen)]
struct Scenario {
    inner: scenario::Scenario,
}

#[pymethods]
impl Scenario {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Scenario {
            inner: scenario::Scenario::from_json(text).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn fixture(name: &str) -> PyResult<Self> {
        Ok(Scenario {
            inner: fixtures::load(name).map_err(to_py)?,
        })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.document.name.clone()
    }

    #[getter]
    fn instance(&self) -> Instance {
        Instance {
            inner: self.inner.instance.clone(),
        }
    }

    fn to_json(&self) -> String {
        self.inner.document.to_json()
    }

    /// Runs a command; `overrides` is a JSON object of configuration fields
    /// merged over the document's own.
    #[pyo3(signature = (command, overrides=None))]
    fn run(&self, py: Python<'_>, command: &str, overrides: Option<&str>) -> PyResult<Py<PyAny>> {
        let command: Command = command.parse().map_err(to_py)?;
        let overrides: Config = match overrides {
            Some(text) => {
                serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?
            }
            None => Config::default(),
        };
        let report = scenario::run_command(command, &self.inner, &overrides).map_err(to_py)?;
        loads(py, &report.to_pretty())
    }

    fn __repr__(&self) -> String {
        format!("Scenario({:?})", self.inner.document.name)
    }
}

/// Replays every bundled fixture.
#[pyfunction]
fn paper_suite(py: Python<'_>) -> PyResult<Py<PyAny>> {
    let report = scenario::paper_suite().map_err(to_py)?;
    loads(py, &report.to_pretty())
}

#[pyfunction]
fn fixture_names() -> Vec<&'static str> {
    fixtures::NAMES.to_vec()
}

#[pymodule]
fn pbflow_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Instance>()?;
    m.add_class::<Scenario>()?;
    m.add_function(wrap_pyfunction!(paper_suite, m)?)?;
    m.add_function(wrap_pyfunction!(fixture_names, m)?)?;
    m.add("PbflowError", m.py().get_type::<PbflowError>())?;
    m.add(
        "ResourceLimitError",
        m.py().get_type::<ResourceLimitError>(),
    )?;
    Ok(())
}
