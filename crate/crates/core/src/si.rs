//! Continuous-time SI individual-level model.
//!
//! A susceptible node `i` becomes infectious at rate
//!
//! ```text
//! λ(i, t) = ψ_S(i) · Σ_{j infectious} ψ_T(j) · κ(i, j) + ζ
//! ψ_S(i)  = ω_0 + Σ_k ω_k X_k(i)
//! ψ_T(j)  = Σ_k φ_k X_k(j)
//! κ(i, j) = α d_ij^(-γ) + Σ_m θ_m C_ij^(m)   if (i, j) is an edge, else 0
//! ```
//!
//! Infection times are treated as exactly observed.

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::error::{invalid, Error, Result};
use crate::graph::{
    betweenness_centrality, clustering_centrality, degree_centrality, path_lengths, EdgeId, Graph, NodeId,
    PathLengths, Point,
};
use crate::rng::SimRng;

#[derive(Debug, Clone, PartialEq)]
pub struct SiParams {
    /// Spark rate ζ.
    pub zeta: f64,
    /// Kernel scale α.
    pub alpha: f64,
    /// Distance exponent γ.
    pub gamma: f64,
    /// Edge-covariate coefficients θ.
    pub theta: Vec<f64>,
    /// Transmissibility coefficients φ.
    pub phi: Vec<f64>,
    /// Susceptibility coefficients, intercept first.
    pub omega: Vec<f64>,
}

impl Default for SiParams {
    fn default() -> Self {
        Self { zeta: 0.0, alpha: 1.0, gamma: 1.0, theta: Vec::new(), phi: Vec::new(), omega: vec![1.0] }
    }
}

/// Node- and edge-level covariates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CovariateSet {
    /// Per-node covariates entering ψ_S (without the intercept).
    pub susceptibility: Vec<Vec<f64>>,
    /// Per-node covariates entering ψ_T.
    pub transmissibility: Vec<Vec<f64>>,
    /// `edge[m][e]` is covariate `m` on edge id `e`.
    pub edge: Vec<Vec<f64>>,
}

impl CovariateSet {
    /// No covariates at all: ψ_S is the intercept and ψ_T is zero.
    pub fn empty(n: usize) -> Self {
        Self { susceptibility: vec![Vec::new(); n], transmissibility: vec![Vec::new(); n], edge: Vec::new() }
    }

    /// Transmissibility covariates `(degree, betweenness, clustering)`, each divided by its maximum.
    pub fn centralities(g: &Graph) -> Self {
        let deg = degree_centrality(g).normalize_by_max();
        let btw = betweenness_centrality(g).normalize_by_max();
        let clu = clustering_centrality(g).normalize_by_max();
        let n = g.node_count();
        Self {
            susceptibility: vec![Vec::new(); n],
            transmissibility: (0..n).map(|i| vec![deg.values[i], btw.values[i], clu.values[i]]).collect(),
            edge: Vec::new(),
        }
    }

    pub fn with_edge_covariate(mut self, values: Vec<f64>) -> Self {
        self.edge.push(values);
        self
    }
}

/// Source of the pairwise distances d_ij used by the kernel.
#[derive(Debug, Clone, PartialEq)]
pub enum DistanceProvider {
    /// Shortest-path hop counts on the graph.
    Hops(PathLengths),
    /// Euclidean distance between node coordinates.
    Euclidean(Vec<Point>),
}

impl DistanceProvider {
    pub fn hops(g: &Graph) -> Self {
        DistanceProvider::Hops(path_lengths(g))
    }

    pub fn euclidean(g: &Graph) -> Result<Self> {
        g.coords()
            .map(|c| DistanceProvider::Euclidean(c.to_vec()))
            .ok_or_else(|| invalid("euclidean distances need node coordinates"))
    }

    /// `None` for pairs with no finite distance.
    pub fn distance(&self, i: NodeId, j: NodeId) -> Option<f64> {
        match self {
            DistanceProvider::Hops(p) => p.get(i, j).map(f64::from),
            DistanceProvider::Euclidean(c) => Some(c[i].distance(&c[j])),
        }
    }
}

fn dot(coef: &[f64], x: &[f64]) -> f64 {
    coef.iter().zip(x).map(|(c, x)| c * x).sum()
}

/// ψ_S(i) = ω_0 + Σ ω_k X_k(i).
pub fn susceptibility(i: NodeId, cov: &CovariateSet, omega: &[f64]) -> Result<f64> {
    let x = cov.susceptibility.get(i).ok_or(Error::NodeOutOfRange(i))?;
    let Some((&intercept, slopes)) = omega.split_first() else {
        return Err(invalid("omega needs at least the intercept"));
    };
    if slopes.len() != x.len() {
        return Err(invalid(format!(
            "susceptibility expects {} covariates for node {i}, found {}",
            slopes.len(),
            x.len()
        )));
    }
    let value = intercept + dot(slopes, x);
    if value < 0.0 {
        return Err(Error::NegativeSusceptibility { node: i, value });
    }
    Ok(value)
}

/// ψ_T(j) = Σ φ_k X_k(j).
pub fn transmissibility(j: NodeId, cov: &CovariateSet, phi: &[f64]) -> Result<f64> {
    let x = cov.transmissibility.get(j).ok_or(Error::NodeOutOfRange(j))?;
    if phi.len() != x.len() {
        return Err(invalid(format!(
            "transmissibility expects {} covariates for node {j}, found {}",
            phi.len(),
            x.len()
        )));
    }
    let value = dot(phi, x);
    if value < 0.0 {
        return Err(Error::NegativeTransmissibility { node: j, value });
    }
    Ok(value)
}

fn edge_kernel(
    g: &Graph,
    e: EdgeId,
    distances: &DistanceProvider,
    cov: &CovariateSet,
    alpha: f64,
    gamma: f64,
    theta: &[f64],
) -> Result<f64> {
    let (i, j) = g.edge(e);
    if theta.len() != cov.edge.len() {
        return Err(invalid(format!("{} edge coefficients for {} edge covariates", theta.len(), cov.edge.len())));
    }
    let d = distances.distance(i, j).ok_or_else(|| invalid(format!("no distance between {i} and {j}")))?;
    if d == 0.0 && gamma > 0.0 {
        return Err(Error::ZeroDistance(i, j));
    }
    let mut k = alpha * d.powf(-gamma);
    for (t, c) in theta.iter().zip(&cov.edge) {
        let value = c.get(e).ok_or_else(|| invalid(format!("edge covariate missing for edge {e}")))?;
        k += t * value;
    }
    Ok(k)
}

/// κ(i, j); zero when `i` and `j` are not adjacent.
#[allow(clippy::too_many_arguments)]
pub fn kernel(
    g: &Graph,
    i: NodeId,
    j: NodeId,
    distances: &DistanceProvider,
    cov: &CovariateSet,
    alpha: f64,
    gamma: f64,
    theta: &[f64],
) -> Result<f64> {
    match g.edge_id(i, j) {
        Some(e) if i != j => edge_kernel(g, e, distances, cov, alpha, gamma, theta),
        _ => Ok(0.0),
    }
}

/// Per-node and per-edge factors of the rate, evaluated once per parameter vector.
#[derive(Debug, Clone)]
pub struct SiModel<'g> {
    g: &'g Graph,
    psi_s: Vec<f64>,
    psi_t: Vec<f64>,
    kappa: Vec<f64>,
    zeta: f64,
}

impl<'g> SiModel<'g> {
    pub fn new(g: &'g Graph, params: &SiParams, cov: &CovariateSet, distances: &DistanceProvider) -> Result<Self> {
        let n = g.node_count();
        if cov.susceptibility.len() != n || cov.transmissibility.len() != n {
            return Err(invalid(format!("covariates cover {} nodes, graph has {n}", cov.susceptibility.len())));
        }
        if !(params.zeta >= 0.0) {
            return Err(invalid(format!("spark rate must be >= 0, got {}", params.zeta)));
        }
        let psi_s = (0..n).map(|i| susceptibility(i, cov, &params.omega)).collect::<Result<Vec<_>>>()?;
        let psi_t = (0..n).map(|j| transmissibility(j, cov, &params.phi)).collect::<Result<Vec<_>>>()?;
        let kappa = (0..g.edge_count())
            .map(|e| {
                let k = edge_kernel(g, e, distances, cov, params.alpha, params.gamma, &params.theta)?;
                if k < 0.0 || k.is_nan() {
                    return Err(Error::NegativeRate { node: g.edge(e).0, value: k });
                }
                Ok(k)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { g, psi_s, psi_t, kappa, zeta: params.zeta })
    }

    pub fn psi_s(&self, i: NodeId) -> f64 {
        self.psi_s[i]
    }

    pub fn psi_t(&self, j: NodeId) -> f64 {
        self.psi_t[j]
    }

    /// Contribution of infectious `j` to the pressure on neighbor `i` across edge `e`.
    fn pair(&self, j: NodeId, e: EdgeId) -> f64 {
        self.psi_t[j] * self.kappa[e]
    }

    /// λ(i) given the current infectious indicator.
    pub fn rate(&self, i: NodeId, infectious: &[bool]) -> f64 {
        let mut pressure = 0.0;
        for (&j, &e) in self.g.neighbors(i).iter().zip(self.g.incident_edges(i)) {
            if infectious[j] {
                pressure += self.pair(j, e);
            }
        }
        self.psi_s[i] * pressure + self.zeta
    }

    /// Log-likelihood of an exactly observed event log.
    pub fn log_likelihood(&self, log: &EventLog) -> Result<f64> {
        let g = self.g;
        let n = g.node_count();
        log.validate(n)?;
        let mut infectious = vec![false; n];
        for &i in &log.initial {
            infectious[i] = true;
        }
        let mut pressure = vec![0.0; n];
        for j in 0..n {
            if infectious[j] {
                for (&i, &e) in g.neighbors(j).iter().zip(g.incident_edges(j)) {
                    pressure[i] += self.pair(j, e);
                }
            }
        }
        let mut total: f64 = (0..n).filter(|&i| !infectious[i]).map(|i| self.psi_s[i] * pressure[i] + self.zeta).sum();
        let mut ll = 0.0;
        let mut prev = 0.0;
        for ev in &log.events {
            let i = ev.node;
            let rate = self.psi_s[i] * pressure[i] + self.zeta;
            if rate <= 0.0 {
                return Ok(f64::NEG_INFINITY);
            }
            ll += rate.ln() - total * (ev.time - prev);
            prev = ev.time;
            infectious[i] = true;
            total -= rate;
            for (&s, &e) in g.neighbors(i).iter().zip(g.incident_edges(i)) {
                let add = self.pair(i, e);
                pressure[s] += add;
                if !infectious[s] {
                    total += self.psi_s[s] * add;
                }
            }
        }
        if log.horizon > prev {
            ll -= total.max(0.0) * (log.horizon - prev);
        }
        Ok(ll)
    }
}

/// λ(i, t) for susceptible `i` given the infectious indicator at `t`.
pub fn rate(
    g: &Graph,
    i: NodeId,
    infectious: &[bool],
    params: &SiParams,
    cov: &CovariateSet,
    distances: &DistanceProvider,
) -> Result<f64> {
    if infectious.get(i).copied().unwrap_or(true) {
        return Err(invalid(format!("node {i} is not susceptible")));
    }
    let psi_s = susceptibility(i, cov, &params.omega)?;
    let mut sum = 0.0;
    for &j in g.neighbors(i) {
        if infectious[j] {
            sum += transmissibility(j, cov, &params.phi)?
                * kernel(g, i, j, distances, cov, params.alpha, params.gamma, &params.theta)?;
        }
    }
    let value = psi_s * sum + params.zeta;
    if value < 0.0 {
        return Err(Error::NegativeRate { node: i, value });
    }
    Ok(value)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfectionEvent {
    pub time: f64,
    pub node: NodeId,
}

/// Timed infections of one realization, strictly increasing in time.
#[derive(Debug, Clone, PartialEq)]
pub struct EventLog {
    pub initial: Vec<NodeId>,
    pub events: Vec<InfectionEvent>,
    pub horizon: f64,
}

impl EventLog {
    pub fn validate(&self, n: usize) -> Result<()> {
        let mut seen = vec![false; n];
        for &i in &self.initial {
            if i >= n {
                return Err(Error::NodeOutOfRange(i));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidEventLog(format!("node {i} listed twice as initially infected")));
            }
        }
        let mut prev = f64::NEG_INFINITY;
        for ev in &self.events {
            if ev.node >= n {
                return Err(Error::NodeOutOfRange(ev.node));
            }
            if !(ev.time.is_finite() && ev.time >= 0.0) {
                return Err(Error::InvalidEventLog(format!("invalid event time {}", ev.time)));
            }
            if ev.time <= prev {
                return Err(Error::InvalidEventLog(format!("event times must be strictly increasing at t = {}", ev.time)));
            }
            if std::mem::replace(&mut seen[ev.node], true) {
                return Err(Error::InvalidEventLog(format!("node {} infected twice", ev.node)));
            }
            prev = ev.time;
        }
        if self.horizon.is_nan() || self.horizon < prev {
            return Err(Error::InvalidEventLog(format!("horizon {} precedes last event {prev}", self.horizon)));
        }
        Ok(())
    }

    pub fn infected_count(&self) -> usize {
        self.initial.len() + self.events.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimulationStatus {
    HorizonReached,
    AllInfected,
    /// Total rate dropped to zero with susceptible nodes left.
    Extinct,
    /// Stopped after the requested number of infections.
    TargetReached,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationLimits {
    pub horizon: f64,
    /// Stop once this many nodes (initial included) are infected.
    pub max_infected: Option<usize>,
}

impl SimulationLimits {
    pub fn horizon(horizon: f64) -> Self {
        Self { horizon, max_infected: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SiSimulation {
    pub log: EventLog,
    pub status: SimulationStatus,
}

/// Exact (Gillespie) simulation.
///
/// Pressure sums are updated incrementally over the newly infected node's
/// neighborhood. When stopped by `max_infected`, or extinct with an
/// unbounded horizon, the recorded horizon is the last event time.
pub fn simulate_si(
    g: &Graph,
    params: &SiParams,
    cov: &CovariateSet,
    distances: &DistanceProvider,
    initial: &[NodeId],
    limits: SimulationLimits,
    rng: &mut SimRng,
) -> Result<SiSimulation> {
    let model = SiModel::new(g, params, cov, distances)?;
    let n = g.node_count();
    let mut log = EventLog { initial: initial.to_vec(), events: Vec::new(), horizon: limits.horizon };
    log.validate(n)?;
    let mut infectious = vec![false; n];
    for &i in initial {
        infectious[i] = true;
    }
    let mut rates: Vec<f64> = (0..n).map(|i| if infectious[i] { 0.0 } else { model.rate(i, &infectious) }).collect();
    let mut count = initial.len();
    let mut t = 0.0;
    let status = loop {
        if count == n {
            break SimulationStatus::AllInfected;
        }
        if limits.max_infected.is_some_and(|m| count >= m) {
            log.horizon = t;
            break SimulationStatus::TargetReached;
        }
        let total: f64 = rates.iter().sum();
        if total <= 0.0 {
            if !limits.horizon.is_finite() {
                log.horizon = t;
            }
            break SimulationStatus::Extinct;
        }
        let wait = Exp::new(total).map_err(|e| invalid(e.to_string()))?.sample(rng);
        if t + wait > limits.horizon {
            break SimulationStatus::HorizonReached;
        }
        let mut target = rng.random::<f64>() * total;
        let mut chosen = None;
        let mut last_positive = None;
        for (i, &r) in rates.iter().enumerate() {
            if r > 0.0 {
                last_positive = Some(i);
                if target < r {
                    chosen = Some(i);
                    break;
                }
                target -= r;
            }
        }
        let i = chosen.or(last_positive).expect("positive total rate");
        // Strictly increasing times even if the draw underflows.
        t = if t + wait > t { t + wait } else { f64::from_bits(t.to_bits() + 1) };
        infectious[i] = true;
        rates[i] = 0.0;
        count += 1;
        log.events.push(InfectionEvent { time: t, node: i });
        for (&s, &e) in g.neighbors(i).iter().zip(g.incident_edges(i)) {
            if !infectious[s] {
                rates[s] += model.psi_s(s) * model.pair(i, e);
            }
        }
    };
    if status == SimulationStatus::AllInfected && !limits.horizon.is_finite() {
        log.horizon = t;
    }
    Ok(SiSimulation { log, status })
}

/// Convenience wrapper building the model for a single evaluation.
pub fn log_likelihood(
    params: &SiParams,
    log: &EventLog,
    g: &Graph,
    cov: &CovariateSet,
    distances: &DistanceProvider,
) -> Result<f64> {
    SiModel::new(g, params, cov, distances)?.log_likelihood(log)
}
