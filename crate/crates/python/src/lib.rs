//! Python bindings: graphs, cascades, motif census, SI simulation and inference.

use std::collections::BTreeMap;
use std::path::Path;

use netdiff_core::generators::{self, GeneratorSpec, PointDistribution};
use netdiff_core::graph::{self, Graph};
use netdiff_core::io;
use netdiff_core::kt::{diffusion_speed, kt_simulate, KtParams, SeedKind, SeedStrategy};
use netdiff_core::mcmc::{posterior_summary, run_chains, si_log_likelihood_fn, ChainConfig, SiParamLayout};
use netdiff_core::motif::{census as motif_census, concentration, MotifKind};
use netdiff_core::rng::{rng_from_seed, stream_rng};
use netdiff_core::si::{self, CovariateSet, DistanceProvider, InfectionEvent, SiParams, SimulationLimits};
use netdiff_core::stats::{self, BandedCurve, CurveEnsemble};
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: netdiff_core::Error) -> PyErr {
    match e {
        netdiff_core::Error::Io(e) => PyOSError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

trait OrPyErr<T> {
    fn py_err(self) -> PyResult<T>;
}

impl<T> OrPyErr<T> for netdiff_core::Result<T> {
    fn py_err(self) -> PyResult<T> {
        self.map_err(err)
    }
}

/// Undirected graph with string node labels.
#[pyclass(name = "Graph", module = "netdiff", frozen)]
struct PyGraph {
    inner: Graph,
}

#[pymethods]
impl PyGraph {
    /// Build from `n` nodes labelled "0".."n-1" and a list of `(u, v)` pairs.
    #[new]
    fn new(n: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        Ok(Self { inner: Graph::from_edges(n, edges).py_err()? })
    }

    #[staticmethod]
    #[pyo3(signature = (n, p, seed = 0))]
    fn erdos_renyi(n: usize, p: f64, seed: u64) -> PyResult<Self> {
        Ok(Self { inner: generators::erdos_renyi(n, p, seed).py_err()? })
    }

    #[staticmethod]
    #[pyo3(signature = (n, radius, seed = 0))]
    fn geometric(n: usize, radius: f64, seed: u64) -> PyResult<Self> {
        Ok(Self { inner: generators::geometric_random(n, radius, seed).py_err()? })
    }

    /// Delaunay triangulation of `n` points, "normal" or "uniform".
    #[staticmethod]
    #[pyo3(signature = (n, seed = 0, points = "normal"))]
    fn delaunay(n: usize, seed: u64, points: &str) -> PyResult<Self> {
        let points = match points {
            "normal" => PointDistribution::StandardNormal,
            "uniform" => PointDistribution::UniformSquare,
            other => return Err(PyValueError::new_err(format!("unknown point distribution {other:?}"))),
        };
        Ok(Self { inner: generators::delaunay(n, points, seed).py_err()? })
    }

    #[staticmethod]
    #[pyo3(signature = (blocks, block_size, pw, pb, seed = 0))]
    fn planted_partition(blocks: usize, block_size: usize, pw: f64, pb: f64, seed: u64) -> PyResult<Self> {
        let spec = GeneratorSpec::planted_partition(blocks, block_size, pw, pb);
        Ok(Self { inner: spec.generate(seed).py_err()? })
    }

    /// Read an edge list, optionally attaching a coordinate file.
    #[staticmethod]
    #[pyo3(signature = (path, coords = None))]
    fn read(path: &str, coords: Option<&str>) -> PyResult<Self> {
        let mut g = io::ingest_edge_list(path).py_err()?;
        if let Some(c) = coords {
            g = io::ingest_coordinates(c, g).py_err()?;
        }
        Ok(Self { inner: g })
    }

    fn write(&self, path: &str) -> PyResult<()> {
        io::write_edge_list(&self.inner, path).py_err()
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

    fn labels(&self) -> Vec<String> {
        self.inner.labels().to_vec()
    }

    fn neighbors(&self, u: usize) -> PyResult<Vec<usize>> {
        if u >= self.inner.node_count() {
            return Err(err(netdiff_core::Error::NodeOutOfRange(u)));
        }
        Ok(self.inner.neighbors(u).to_vec())
    }

    fn degrees(&self) -> Vec<usize> {
        self.inner.degrees()
    }

    fn coords(&self) -> Option<Vec<(f64, f64)>> {
        self.inner.coords().map(|c| c.iter().map(|p| (p.x, p.y)).collect())
    }

    fn is_connected(&self) -> bool {
        self.inner.is_connected()
    }

    fn giant_component(&self) -> PyResult<Self> {
        Ok(Self { inner: graph::giant_component(&self.inner).py_err()? })
    }

    fn average_path_length(&self) -> PyResult<f64> {
        graph::average_path_length(&self.inner).py_err()
    }

    fn diameter(&self) -> PyResult<u32> {
        graph::diameter(&self.inner).py_err()
    }

    /// "degree", "betweenness" or "clustering".
    fn centrality(&self, py: Python<'_>, kind: &str) -> PyResult<Vec<f64>> {
        let g = &self.inner;
        let c = match kind {
            "degree" => graph::degree_centrality(g),
            "betweenness" => py.detach(|| graph::betweenness_centrality(g)),
            "clustering" => graph::clustering_centrality(g),
            other => return Err(PyValueError::new_err(format!("unknown centrality {other:?}"))),
        };
        Ok(c.values)
    }

    fn __repr__(&self) -> String {
        format!("Graph(nodes={}, edges={})", self.inner.node_count(), self.inner.edge_count())
    }
}

/// Infections of one SI realization.
#[pyclass(name = "EventLog", module = "netdiff", frozen)]
struct PyEventLog {
    inner: si::EventLog,
}

#[pymethods]
impl PyEventLog {
    /// `events` holds `(time, node)` pairs in increasing time.
    #[new]
    fn new(initial: Vec<usize>, events: Vec<(f64, usize)>, horizon: f64) -> Self {
        let events = events.into_iter().map(|(time, node)| InfectionEvent { time, node }).collect();
        Self { inner: si::EventLog { initial, events, horizon } }
    }

    #[staticmethod]
    fn read(path: &str, graph: &PyGraph) -> PyResult<Self> {
        Ok(Self { inner: io::ingest_event_log(path, &graph.inner).py_err()? })
    }

    fn write(&self, path: &str, graph: &PyGraph) -> PyResult<()> {
        io::write_event_log(&graph.inner, &self.inner, path).py_err()
    }

    #[getter]
    fn initial(&self) -> Vec<usize> {
        self.inner.initial.clone()
    }

    #[getter]
    fn events(&self) -> Vec<(f64, usize)> {
        self.inner.events.iter().map(|e| (e.time, e.node)).collect()
    }

    #[getter]
    fn horizon(&self) -> f64 {
        self.inner.horizon
    }

    fn infected_count(&self) -> usize {
        self.inner.infected_count()
    }

    fn __repr__(&self) -> String {
        format!("EventLog(infected={}, horizon={})", self.inner.infected_count(), self.inner.horizon)
    }
}

fn seed_kind(s: &str) -> PyResult<SeedKind> {
    match s {
        "random" => Ok(SeedKind::Random),
        "degree" => Ok(SeedKind::TopDegree),
        "betweenness" => Ok(SeedKind::TopBetweenness),
        other => Err(PyValueError::new_err(format!("unknown seed strategy {other:?}"))),
    }
}

fn kt_setup(eta0: f64, steps: usize, delta: f64, beta: f64, tau: f64, strategy: &str) -> PyResult<(KtParams, SeedStrategy)> {
    let params = KtParams { eta0, steps, delta, beta, tau, ..KtParams::default() };
    params.validate().py_err()?;
    Ok((params, SeedStrategy::new(seed_kind(strategy)?, eta0)))
}

fn curve_dict<'py>(py: Python<'py>, c: &BandedCurve) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("mean", &c.mean)?;
    d.set_item("lo", &c.lo)?;
    d.set_item("hi", &c.hi)?;
    d.set_item("method", c.method.name())?;
    Ok(d)
}

/// One cascade; returns the adopted fraction per step and the diffusion speed.
#[pyfunction]
#[pyo3(name = "kt_simulate", signature = (graph, seed, eta0 = 0.01, steps = 500, delta = 0.001, beta = 0.05, tau = 0.30, strategy = "degree"))]
#[allow(clippy::too_many_arguments)]
fn kt_simulate_py(
    graph: &PyGraph,
    seed: u64,
    eta0: f64,
    steps: usize,
    delta: f64,
    beta: f64,
    tau: f64,
    strategy: &str,
) -> PyResult<(Vec<f64>, f64)> {
    let (params, strategy) = kt_setup(eta0, steps, delta, beta, tau, strategy)?;
    let trace = kt_simulate(&graph.inner, &params, &strategy, &mut rng_from_seed(seed)).py_err()?;
    Ok((trace.curve(steps + 1), diffusion_speed(&trace).nu))
}

/// Repeated cascades on one graph, summarized as a mean curve with a 95% band.
#[pyfunction]
#[pyo3(signature = (
    graph, runs, seed, eta0 = 0.01, steps = 500, delta = 0.001, beta = 0.05, tau = 0.30,
    strategy = "degree", method = "percentile", resamples = 1000,
))]
#[allow(clippy::too_many_arguments)]
fn kt_curves<'py>(
    py: Python<'py>,
    graph: &PyGraph,
    runs: usize,
    seed: u64,
    eta0: f64,
    steps: usize,
    delta: f64,
    beta: f64,
    tau: f64,
    strategy: &str,
    method: &str,
    resamples: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let (params, strategy) = kt_setup(eta0, steps, delta, beta, tau, strategy)?;
    let g = &graph.inner;
    let ens = py.detach(|| stats::kt_curves_on_graph(g, runs, &params, &strategy, seed)).py_err()?;
    let curve = banded(&ens, method, resamples, seed)?;
    curve_dict(py, &curve)
}

fn banded(ens: &CurveEnsemble, method: &str, resamples: usize, seed: u64) -> PyResult<BandedCurve> {
    match method {
        "percentile" => stats::infection_bands(ens).py_err(),
        "bootstrap" => stats::bootstrap_bands(ens, resamples, &mut stream_rng(seed, u64::MAX)).py_err(),
        other => Err(PyValueError::new_err(format!("unknown band method {other:?}"))),
    }
}

/// Mean curve and 95% band for equal-length runs.
#[pyfunction]
#[pyo3(signature = (runs, method = "percentile", resamples = 1000, seed = 0))]
fn bands<'py>(
    py: Python<'py>,
    runs: Vec<Vec<f64>>,
    method: &str,
    resamples: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let ens = CurveEnsemble::new(runs).py_err()?;
    curve_dict(py, &banded(&ens, method, resamples, seed)?)
}

/// Edge-disjoint census of the six connected 4-node motifs.
#[pyfunction]
fn census<'py>(py: Python<'py>, graph: &PyGraph) -> PyResult<Bound<'py, PyDict>> {
    let c = motif_census(&graph.inner);
    let counts: BTreeMap<&str, usize> = MotifKind::ALL.iter().map(|&m| (m.name(), c.count(m))).collect();
    let d = PyDict::new(py);
    d.set_item("counts", counts)?;
    match concentration(&c) {
        Ok(conc) => {
            let conc: BTreeMap<&str, f64> = conc.into_iter().map(|(m, v)| (m.name(), v)).collect();
            d.set_item("concentrations", conc)?;
        }
        Err(netdiff_core::Error::NoMotifs) => d.set_item("concentrations", py.None())?,
        Err(e) => return Err(err(e)),
    }
    d.set_item("used_edges", c.used_edges.len())?;
    d.set_item("total_edges", c.total_edges)?;
    Ok(d)
}

/// Centrality covariates and distances used by both SI entry points.
fn si_inputs(g: &Graph, distance: &str) -> PyResult<(CovariateSet, DistanceProvider)> {
    let dist = match distance {
        "hops" => DistanceProvider::hops(g),
        "euclidean" => DistanceProvider::euclidean(g).py_err()?,
        other => return Err(PyValueError::new_err(format!("unknown distance {other:?}"))),
    };
    Ok((CovariateSet::centralities(g), dist))
}

fn si_params(cov: &CovariateSet, zeta: f64, alpha: f64, gamma: f64, phi: Option<Vec<f64>>) -> SiParams {
    let width = cov.transmissibility.first().map_or(0, Vec::len);
    SiParams { zeta, alpha, gamma, phi: phi.unwrap_or_else(|| vec![1.0; width]), ..SiParams::default() }
}

/// Gillespie SI simulation with degree, betweenness and clustering covariates.
#[pyfunction]
#[pyo3(signature = (
    graph, alpha, seed, initial, zeta = 0.0, gamma = 1.0, phi = None, horizon = f64::INFINITY,
    max_infected = None, distance = "hops",
))]
#[allow(clippy::too_many_arguments)]
fn simulate_si(
    py: Python<'_>,
    graph: &PyGraph,
    alpha: f64,
    seed: u64,
    initial: Vec<usize>,
    zeta: f64,
    gamma: f64,
    phi: Option<Vec<f64>>,
    horizon: f64,
    max_infected: Option<usize>,
    distance: &str,
) -> PyResult<PyEventLog> {
    let g = &graph.inner;
    let (cov, dist) = si_inputs(g, distance)?;
    let params = si_params(&cov, zeta, alpha, gamma, phi);
    let limits = SimulationLimits { horizon, max_infected };
    let sim = py
        .detach(|| si::simulate_si(g, &params, &cov, &dist, &initial, limits, &mut rng_from_seed(seed)))
        .py_err()?;
    Ok(PyEventLog { inner: sim.log })
}

#[pyfunction]
#[pyo3(signature = (graph, log, alpha, zeta = 0.0, gamma = 1.0, phi = None, distance = "hops"))]
#[allow(clippy::too_many_arguments)]
fn si_log_likelihood(
    graph: &PyGraph,
    log: &PyEventLog,
    alpha: f64,
    zeta: f64,
    gamma: f64,
    phi: Option<Vec<f64>>,
    distance: &str,
) -> PyResult<f64> {
    let (cov, dist) = si_inputs(&graph.inner, distance)?;
    let params = si_params(&cov, zeta, alpha, gamma, phi);
    si::log_likelihood(&params, &log.inner, &graph.inner, &cov, &dist).py_err()
}

/// Posterior means and 95% intervals by adaptive Metropolis–Hastings.
///
/// `priors` uses the priors-file syntax, one `name = family(args)` per line.
#[pyfunction]
#[pyo3(signature = (graph, log, priors, seed, iterations = 20_000, burn_in = 2_000, chains = 2, distance = "hops"))]
#[allow(clippy::too_many_arguments)]
fn infer_si<'py>(
    py: Python<'py>,
    graph: &PyGraph,
    log: &PyEventLog,
    priors: &str,
    seed: u64,
    iterations: usize,
    burn_in: usize,
    chains: usize,
    distance: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let g = &graph.inner;
    let (cov, dist) = si_inputs(g, distance)?;
    let prior = io::parse_priors(Path::new("<priors>"), priors).py_err()?;
    let layout = SiParamLayout::new(&prior.names, si_params(&cov, 0.0, 1.0, 1.0, None)).py_err()?;
    let config = ChainConfig::new(iterations, burn_in);
    let events = &log.inner;
    let (runs, summary) = py
        .detach(|| {
            let lik = si_log_likelihood_fn(&layout, g, &cov, &dist, events);
            let runs = run_chains(chains, seed, &config, &prior, &lik)?;
            let summary = posterior_summary(&runs)?;
            Ok((runs, summary))
        })
        .py_err()?;
    let out = PyDict::new(py);
    for s in summary {
        let p = PyDict::new(py);
        p.set_item("mean", s.mean)?;
        p.set_item("ci_lo", s.ci_lo)?;
        p.set_item("ci_hi", s.ci_hi)?;
        out.set_item(s.name, p)?;
    }
    let rates: Vec<f64> = runs.iter().map(|c| c.kept_acceptance_rate()).collect();
    let d = PyDict::new(py);
    d.set_item("parameters", out)?;
    d.set_item("acceptance_rates", rates)?;
    Ok(d)
}

/// k-sample Anderson–Darling test.
#[pyfunction]
fn ad_test<'py>(py: Python<'py>, samples: Vec<Vec<f64>>) -> PyResult<Bound<'py, PyDict>> {
    let refs: Vec<&[f64]> = samples.iter().map(Vec::as_slice).collect();
    let r = stats::ad_k_sample(&refs).py_err()?;
    let d = PyDict::new(py);
    d.set_item("statistic", r.statistic)?;
    d.set_item("p_value", r.p_value)?;
    d.set_item("critical_values", r.critical_values.to_vec())?;
    Ok(d)
}

#[pymodule]
fn netdiff(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyGraph>()?;
    m.add_class::<PyEventLog>()?;
    m.add_function(wrap_pyfunction!(kt_simulate_py, m)?)?;
    m.add_function(wrap_pyfunction!(kt_curves, m)?)?;
    m.add_function(wrap_pyfunction!(bands, m)?)?;
    m.add_function(wrap_pyfunction!(census, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_si, m)?)?;
    m.add_function(wrap_pyfunction!(si_log_likelihood, m)?)?;
    m.add_function(wrap_pyfunction!(infer_si, m)?)?;
    m.add_function(wrap_pyfunction!(ad_test, m)?)?;
    Ok(())
}
