//! Python bindings: graphs, network statistics, generators, RDS recruitment,
//! estimators and the replicated study drivers.

use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use rand_chacha::ChaCha8Rng;

use rdsim_core::covgen::{generate_binary_covariates, CovariateSpec};
use rdsim_core::estimators::{estimate_all, induced_homophily as induced};
use rdsim_core::harness::{
    run_engage_mimic as engage, run_experiment as experiment, stream, write_replicates, BiasSummary,
    StudyOutput,
};
use rdsim_core::netgen::{self, GenerationMode, NetworkTargets};
use rdsim_core::rds::{self, SamplerConfig};
use rdsim_core::{io, stats, AttributeVector, Config, Error, Graph, RecruitmentForest};

create_exception!(rdsim, RdsimError, PyValueError, "Invalid input or configuration.");
create_exception!(rdsim, InfeasibleError, RdsimError, "Targets admit no valid network.");
create_exception!(rdsim, UndefinedError, RdsimError, "Statistic is undefined on this input.");

fn err(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::Infeasible(_) => InfeasibleError::new_err(msg),
        Error::Undefined(_) => UndefinedError::new_err(msg),
        Error::Io(_) => PyOSError::new_err(msg),
        _ => RdsimError::new_err(msg),
    }
}

fn rng(seed: u64, stage: &str) -> ChaCha8Rng {
    stream(seed, stage, 0)
}

fn attribute(values: Vec<u8>) -> PyResult<AttributeVector> {
    AttributeVector::new("z", values).map_err(err)
}

/// Undirected simple graph on nodes `0..node_count`.
#[pyclass(name = "Graph", module = "rdsim", frozen)]
struct PyGraph {
    inner: Graph,
}

#[pymethods]
impl PyGraph {
    #[new]
    fn new(node_count: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        Ok(PyGraph { inner: Graph::from_edges(node_count, edges).map_err(err)? })
    }

    #[staticmethod]
    #[pyo3(signature = (path, node_count=None))]
    fn read_csv(path: PathBuf, node_count: Option<usize>) -> PyResult<Self> {
        Ok(PyGraph { inner: io::load_edge_list(&path, node_count).map_err(err)? })
    }

    fn write_csv(&self, path: PathBuf) -> PyResult<()> {
        io::save_edge_list(&self.inner, &path).map_err(err)
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.inner.node_count()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges().to_vec()
    }

    fn degrees(&self) -> Vec<usize> {
        self.inner.degrees()
    }

    fn neighbors(&self, node: usize) -> PyResult<Vec<usize>> {
        if node >= self.inner.node_count() {
            return Err(RdsimError::new_err(format!("node {node} out of range")));
        }
        Ok(self.inner.neighbors(node).to_vec())
    }

    fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.inner.node_count() && b < self.inner.node_count() && self.inner.has_edge(a, b)
    }

    fn __len__(&self) -> usize {
        self.inner.node_count()
    }

    fn __repr__(&self) -> String {
        format!("Graph(nodes={}, edges={})", self.inner.node_count(), self.inner.edge_count())
    }
}

/// Observed RDS sample: who recruited whom, waves, reported degrees and
/// attributes.
#[pyclass(name = "RecruitmentForest", module = "rdsim", frozen)]
struct PyForest {
    inner: RecruitmentForest,
}

#[pymethods]
impl PyForest {
    #[staticmethod]
    fn read_csv(path: PathBuf) -> PyResult<Self> {
        Ok(PyForest { inner: io::load_forest(&path).map_err(err)? })
    }

    fn write_csv(&self, path: PathBuf) -> PyResult<()> {
        io::save_forest(&self.inner, &path).map_err(err)
    }

    #[getter]
    fn attribute_names(&self) -> Vec<String> {
        self.inner.attribute_names.clone()
    }

    #[getter]
    fn truncated(&self) -> bool {
        self.inner.truncated
    }

    #[getter]
    fn reseeds(&self) -> usize {
        self.inner.reseeds
    }

    #[getter]
    fn max_wave(&self) -> u32 {
        self.inner.max_wave()
    }

    /// `(node, recruiter, wave, seed_id, coupon_index, reported_degree, attributes)`
    /// in recruitment order.
    #[allow(clippy::type_complexity)]
    fn entries(&self) -> Vec<(usize, Option<usize>, u32, u32, Option<u32>, usize, Vec<u8>)> {
        self.inner
            .entries
            .iter()
            .map(|e| (e.node, e.recruiter, e.wave, e.seed_id, e.coupon_index, e.reported_degree, e.attributes.clone()))
            .collect()
    }

    fn nodes(&self) -> Vec<usize> {
        self.inner.entries.iter().map(|e| e.node).collect()
    }

    fn recruitment_edges(&self) -> Vec<(usize, usize)> {
        self.inner.recruitment_edges().collect()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "RecruitmentForest(size={}, seeds={}, max_wave={}, attributes={:?})",
            self.inner.len(),
            self.inner.seed_count(),
            self.inner.max_wave(),
            self.inner.attribute_names
        )
    }
}

#[pyfunction]
fn mean_degree(g: &PyGraph) -> f64 {
    stats::mean_degree(&g.inner)
}

#[pyfunction]
fn prevalence(z: Vec<u8>) -> PyResult<f64> {
    Ok(stats::prevalence(&attribute(z)?))
}

#[pyfunction]
fn differential_activity(g: &PyGraph, z: Vec<u8>) -> PyResult<f64> {
    stats::differential_activity(&g.inner, &attribute(z)?).map_err(err)
}

/// `(within_1, within_0, cross)` edge counts.
#[pyfunction]
fn mixing_counts(g: &PyGraph, z: Vec<u8>) -> PyResult<(u64, u64, u64)> {
    let m = stats::mixing_counts(&g.inner, &attribute(z)?).map_err(err)?;
    Ok((m.within_1, m.within_0, m.cross))
}

#[pyfunction]
fn homophily_r(g: &PyGraph, z: Vec<u8>) -> PyResult<f64> {
    let m = stats::mixing_counts(&g.inner, &attribute(z)?).map_err(err)?;
    stats::homophily_r(&m).map_err(err)
}

#[pyfunction]
fn homophily_newman(g: &PyGraph, z: Vec<u8>) -> PyResult<f64> {
    let m = stats::mixing_counts(&g.inner, &attribute(z)?).map_err(err)?;
    stats::homophily_newman(&m).map_err(err)
}

#[pyfunction]
fn h_from_r(r: f64, p: f64, diff_activity: f64) -> PyResult<f64> {
    stats::h_from_r(r, p, diff_activity).map_err(err)
}

#[pyfunction]
fn r_from_h(h: f64, p: f64, diff_activity: f64) -> PyResult<f64> {
    stats::r_from_h(h, p, diff_activity).map_err(err)
}

fn targets(n: usize, p: f64, mean_degree: f64, diff_activity: f64, homophily_r: f64) -> NetworkTargets {
    NetworkTargets { n, p, mean_degree, diff_activity, homophily_r }
}

/// Expected edge counts and tie probabilities per dyad class.
#[pyfunction]
fn solve_edge_targets<'py>(
    py: Python<'py>,
    n: usize,
    p: f64,
    mean_degree: f64,
    diff_activity: f64,
    homophily_r: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let s = netgen::solve_edge_targets(&targets(n, p, mean_degree, diff_activity, homophily_r)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("n1", s.n1)?;
    d.set_item("n0", s.n0)?;
    for (k, v) in [("e11", s.e11), ("e10", s.e10), ("e00", s.e00), ("q11", s.q11), ("q10", s.q10), ("q00", s.q00)] {
        d.set_item(k, v)?;
    }
    Ok(d)
}

/// Draws a population network; returns `(graph, attribute)`.
#[pyfunction]
#[pyo3(signature = (n, p, mean_degree, diff_activity, homophily_r, seed=0, mode="bernoulli"))]
fn generate_network(
    n: usize,
    p: f64,
    mean_degree: f64,
    diff_activity: f64,
    homophily_r: f64,
    seed: u64,
    mode: &str,
) -> PyResult<(PyGraph, Vec<u8>)> {
    let mode: GenerationMode = mode.parse().map_err(err)?;
    let (g, z) = netgen::generate_network(
        &targets(n, p, mean_degree, diff_activity, homophily_r),
        &mut rng(seed, "netgen"),
        mode,
    )
    .map_err(err)?;
    Ok((PyGraph { inner: g }, z.values().to_vec()))
}

/// Correlated binary covariates; returns `{name: values}` in input order.
#[pyfunction]
#[pyo3(signature = (marginals, correlations, n, seed=0, names=None))]
fn generate_covariates<'py>(
    py: Python<'py>,
    marginals: Vec<f64>,
    correlations: Vec<Vec<f64>>,
    n: usize,
    seed: u64,
    names: Option<Vec<String>>,
) -> PyResult<Bound<'py, PyDict>> {
    let names = names.unwrap_or_else(|| (0..marginals.len()).map(|i| format!("z{}", i + 1)).collect());
    let spec = CovariateSpec { names, marginals, correlations };
    let z = generate_binary_covariates(&spec, n, &mut rng(seed, "covgen")).map_err(err)?;
    let d = PyDict::new(py);
    for c in z.columns() {
        d.set_item(c.name(), c.values().to_vec())?;
    }
    Ok(d)
}

fn attribute_columns(attributes: &Bound<'_, PyAny>) -> PyResult<Vec<AttributeVector>> {
    if let Ok(d) = attributes.cast::<PyDict>() {
        d.iter()
            .map(|(k, v)| AttributeVector::new(k.extract::<String>()?, v.extract::<Vec<u8>>()?).map_err(err))
            .collect()
    } else {
        Ok(vec![attribute(attributes.extract::<Vec<u8>>()?)?])
    }
}

/// Runs RDS recruitment. `attributes` is a list of 0/1 values (named `z`) or
/// a dict of named lists. `coupons=None` means unlimited.
#[pyfunction]
#[pyo3(signature = (graph, attributes, seeds, coupons, sample_size, seed=0, seed_selection="uniform", reseed=true))]
#[allow(clippy::too_many_arguments)]
fn run_rds(
    graph: &PyGraph,
    attributes: &Bound<'_, PyAny>,
    seeds: usize,
    coupons: Option<usize>,
    sample_size: usize,
    seed: u64,
    seed_selection: &str,
    reseed: bool,
) -> PyResult<PyForest> {
    let columns = attribute_columns(attributes)?;
    let cfg = SamplerConfig {
        num_seeds: seeds,
        coupons_per_node: coupons.unwrap_or(usize::MAX),
        target_sample_size: sample_size,
        seed_selection: seed_selection.parse().map_err(err)?,
        reseed_on_death: reseed,
    };
    let forest = rds::run_rds(&graph.inner, &columns, &cfg, &mut rng(seed, "rds")).map_err(err)?;
    Ok(PyForest { inner: forest })
}

/// Sample estimates for one attribute; undefined estimates are `None`.
#[pyfunction]
#[pyo3(signature = (forest, attribute="z"))]
fn estimate<'py>(py: Python<'py>, forest: &PyForest, attribute: &str) -> PyResult<Bound<'py, PyDict>> {
    let i = forest.inner.attribute_index(attribute).map_err(err)?;
    let e = estimate_all(&forest.inner, i);
    let d = PyDict::new(py);
    d.set_item("d_a", e.d_a_hat)?;
    d.set_item("h", e.h_hat)?;
    d.set_item("r", e.r_hat)?;
    d.set_item("rds2_prevalence", e.rds2_prevalence)?;
    d.set_item("crude_prevalence", e.crude_prevalence)?;
    d.set_item("sample_size", e.sample_size)?;
    d.set_item("max_wave", e.max_wave)?;
    Ok(d)
}

/// Homophily of the subgraph induced by the sampled nodes (needs the
/// population graph).
#[pyfunction]
#[pyo3(signature = (forest, graph, attribute="z"))]
fn induced_homophily(forest: &PyForest, graph: &PyGraph, attribute: &str) -> PyResult<f64> {
    let i = forest.inner.attribute_index(attribute).map_err(err)?;
    induced(&forest.inner, &graph.inner, i).map_err(err)
}

fn summary_rows<'py>(py: Python<'py>, summary: &[BiasSummary]) -> PyResult<Bound<'py, PyList>> {
    let rows = PyList::empty(py);
    for s in summary {
        let d = PyDict::new(py);
        d.set_item("cell", &s.cell)?;
        d.set_item("attribute", &s.attribute)?;
        d.set_item("estimand", s.estimand.name())?;
        d.set_item("replicates", s.replicates)?;
        d.set_item("count", s.count)?;
        d.set_item("undefined", s.undefined)?;
        d.set_item("skipped", s.skipped)?;
        for (k, v) in [("min", s.min), ("q1", s.q1), ("median", s.median), ("q3", s.q3), ("max", s.max), ("mean", s.mean)] {
            d.set_item(k, v)?;
        }
        rows.append(d)?;
    }
    Ok(rows)
}

fn study_result<'py>(py: Python<'py>, out: StudyOutput) -> PyResult<(Bound<'py, PyList>, String)> {
    let mut csv = Vec::new();
    write_replicates(&out.records, &mut csv).map_err(err)?;
    Ok((summary_rows(py, &out.summary)?, String::from_utf8(csv).expect("csv is utf-8")))
}

fn parse_config(config: &str, seed: Option<u64>) -> PyResult<Config> {
    let mut c = Config::parse(config).map_err(err)?;
    if seed.is_some() {
        c.experiment.seed = seed;
    }
    Ok(c)
}

/// Runs a parameter sweep from TOML config text (empty for the preset).
/// Returns `(summary rows, replicates CSV text)`.
#[pyfunction]
#[pyo3(signature = (config="", desk_scale=true, seed=None))]
fn run_experiment<'py>(
    py: Python<'py>,
    config: &str,
    desk_scale: bool,
    seed: Option<u64>,
) -> PyResult<(Bound<'py, PyList>, String)> {
    let plan = parse_config(config, seed)?.experiment_plan(desk_scale).map_err(err)?;
    let out = py.detach(|| experiment(&plan)).map_err(err)?;
    study_result(py, out)
}

/// Runs the three-covariate clinic-study scenario.
#[pyfunction]
#[pyo3(signature = (config="", desk_scale=true, seed=None))]
fn run_engage_mimic<'py>(
    py: Python<'py>,
    config: &str,
    desk_scale: bool,
    seed: Option<u64>,
) -> PyResult<(Bound<'py, PyList>, String)> {
    let scenario = parse_config(config, seed)?.engage_scenario(desk_scale).map_err(err)?;
    let out = py.detach(|| engage(&scenario)).map_err(err)?;
    study_result(py, out)
}

#[pymodule]
fn rdsim(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("RdsimError", m.py().get_type::<RdsimError>())?;
    m.add("InfeasibleError", m.py().get_type::<InfeasibleError>())?;
    m.add("UndefinedError", m.py().get_type::<UndefinedError>())?;
    m.add_class::<PyGraph>()?;
    m.add_class::<PyForest>()?;

    m.add_function(wrap_pyfunction!(mean_degree, m)?)?;
    m.add_function(wrap_pyfunction!(prevalence, m)?)?;
    m.add_function(wrap_pyfunction!(differential_activity, m)?)?;
    m.add_function(wrap_pyfunction!(mixing_counts, m)?)?;
    m.add_function(wrap_pyfunction!(homophily_r, m)?)?;
    m.add_function(wrap_pyfunction!(homophily_newman, m)?)?;
    m.add_function(wrap_pyfunction!(h_from_r, m)?)?;
    m.add_function(wrap_pyfunction!(r_from_h, m)?)?;

    m.add_function(wrap_pyfunction!(solve_edge_targets, m)?)?;
    m.add_function(wrap_pyfunction!(generate_network, m)?)?;
    m.add_function(wrap_pyfunction!(generate_covariates, m)?)?;

    m.add_function(wrap_pyfunction!(run_rds, m)?)?;
    m.add_function(wrap_pyfunction!(estimate, m)?)?;
    m.add_function(wrap_pyfunction!(induced_homophily, m)?)?;

    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(run_engage_mimic, m)?)?;
    Ok(())
}
