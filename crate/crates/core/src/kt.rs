//! Threshold cascade with blocked nodes and spontaneous adoption.
//!
//! Each step every susceptible, non-blocked node `v` looks at the share of
//! its neighbors that had adopted by the previous step, `λ_v`, and adopts if
//! `λ_v >= τ` or, independently, with probability `δ`. Updates are
//! synchronous. With `δ = 0` and no blocked nodes this is the Watts model.

use rand::seq::index;
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::graph::{betweenness_centrality, degree_centrality, Graph, NodeId};
use crate::rng::SimRng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KtParams {
    /// Initially infected fraction η(0).
    pub eta0: f64,
    /// Maximum number of steps.
    pub steps: usize,
    /// Spontaneous adoption probability per node per step.
    pub delta: f64,
    /// Blocked fraction.
    pub beta: f64,
    /// Adoption threshold.
    pub tau: f64,
    /// η level treated as steady state when measuring speed.
    pub steady_fraction: f64,
}

impl Default for KtParams {
    fn default() -> Self {
        Self { eta0: 0.01, steps: 500, delta: 0.001, beta: 0.05, tau: 0.30, steady_fraction: 0.95 }
    }
}

impl KtParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("eta0", self.eta0),
            ("delta", self.delta),
            ("beta", self.beta),
            ("steady_fraction", self.steady_fraction),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(invalid(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        if self.tau.is_nan() || self.tau < 0.0 {
            return Err(invalid(format!("tau must be >= 0, got {}", self.tau)));
        }
        if self.steps == 0 {
            return Err(invalid("steps must be >= 1"));
        }
        if self.eta0 + self.beta > 1.0 {
            return Err(invalid("eta0 + beta must not exceed 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedKind {
    Random,
    TopDegree,
    TopBetweenness,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedStrategy {
    pub kind: SeedKind,
    pub fraction: f64,
}

impl SeedStrategy {
    pub fn new(kind: SeedKind, fraction: f64) -> Self {
        Self { kind, fraction }
    }

    /// `ceil(fraction * n)`, tolerant of representation error in the product.
    pub fn count(&self, n: usize) -> Result<usize> {
        if !(self.fraction > 0.0 && self.fraction <= 1.0) {
            return Err(invalid(format!("seed fraction must lie in (0, 1], got {}", self.fraction)));
        }
        let k = (self.fraction * n as f64 - 1e-9).ceil().max(0.0) as usize;
        if k > n {
            return Err(invalid(format!("{k} seeds requested from {n} nodes")));
        }
        Ok(k.max(1).min(n))
    }
}

/// Indices of the `k` largest values, ties by ascending index.
fn top_k(values: &[f64], k: usize) -> Vec<NodeId> {
    let mut order: Vec<NodeId> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order.truncate(k);
    order.sort_unstable();
    order
}

/// Initially infected nodes, sorted ascending.
pub fn select_seeds(g: &Graph, strategy: &SeedStrategy, rng: &mut SimRng) -> Result<Vec<NodeId>> {
    if g.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let n = g.node_count();
    let k = strategy.count(n)?;
    Ok(match strategy.kind {
        SeedKind::Random => {
            let mut s = index::sample(rng, n, k).into_vec();
            s.sort_unstable();
            s
        }
        SeedKind::TopDegree => top_k(&degree_centrality(g).values, k),
        SeedKind::TopBetweenness => top_k(&betweenness_centrality(g).values, k),
    })
}

/// `round(beta * n)` nodes drawn uniformly from the non-seeds.
pub fn select_blocked(g: &Graph, beta: f64, seeds: &[NodeId], rng: &mut SimRng) -> Result<Vec<NodeId>> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(invalid(format!("beta must lie in [0, 1], got {beta}")));
    }
    let n = g.node_count();
    let mut is_seed = vec![false; n];
    for &s in seeds {
        if s >= n {
            return Err(Error::NodeOutOfRange(s));
        }
        is_seed[s] = true;
    }
    let pool: Vec<NodeId> = (0..n).filter(|&v| !is_seed[v]).collect();
    let k = (beta * n as f64).round() as usize;
    if k > pool.len() {
        return Err(invalid(format!("cannot block {k} nodes: only {} non-seed nodes", pool.len())));
    }
    let mut out: Vec<NodeId> = index::sample(rng, pool.len(), k).into_iter().map(|i| pool[i]).collect();
    out.sort_unstable();
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeState {
    Susceptible,
    Adopted,
    Blocked,
}

/// Record of one cascade run.
///
/// States are stored compactly as adoption steps; because adoption is
/// permanent this is equivalent to the full per-step state table.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionTrace {
    adopted_at: Vec<Option<u32>>,
    blocked: Vec<bool>,
    /// η(t) for `t = 0..=T`.
    pub eta: Vec<f64>,
    /// First step with η(t) >= steady fraction.
    pub steady_step: Option<usize>,
    pub steady_fraction: f64,
    /// Configured step budget `k`.
    pub max_steps: usize,
}

impl DiffusionTrace {
    /// Last recorded step `T` (can be below `max_steps` after an early exit).
    pub fn last_step(&self) -> usize {
        self.eta.len() - 1
    }

    pub fn node_count(&self) -> usize {
        self.blocked.len()
    }

    pub fn state(&self, v: NodeId, t: usize) -> NodeState {
        if self.blocked[v] {
            NodeState::Blocked
        } else if matches!(self.adopted_at[v], Some(s) if s as usize <= t) {
            NodeState::Adopted
        } else {
            NodeState::Susceptible
        }
    }

    pub fn states_at(&self, t: usize) -> Vec<NodeState> {
        (0..self.node_count()).map(|v| self.state(v, t)).collect()
    }

    pub fn adopted_at(&self, v: NodeId) -> Option<usize> {
        self.adopted_at[v].map(|s| s as usize)
    }

    pub fn adopted_set(&self, t: usize) -> Vec<NodeId> {
        (0..self.node_count()).filter(|&v| self.state(v, t) == NodeState::Adopted).collect()
    }

    pub fn blocked_set(&self) -> Vec<NodeId> {
        (0..self.node_count()).filter(|&v| self.blocked[v]).collect()
    }

    /// η curve of length `len`, holding the final value after an early exit.
    pub fn curve(&self, len: usize) -> Vec<f64> {
        let last = *self.eta.last().unwrap();
        (0..len).map(|t| self.eta.get(t).copied().unwrap_or(last)).collect()
    }
}

/// Runs the cascade for up to `params.steps` steps.
///
/// One uniform draw is consumed per node per step whatever its state, so
/// runs that share a stream are coupled step by step.
pub fn kt_run(
    g: &Graph,
    params: &KtParams,
    seeds: &[NodeId],
    blocked: &[NodeId],
    rng: &mut SimRng,
) -> Result<DiffusionTrace> {
    params.validate()?;
    let n = g.node_count();
    let mut adopted_at: Vec<Option<u32>> = vec![None; n];
    let mut is_blocked = vec![false; n];
    for &b in blocked {
        if b >= n {
            return Err(Error::NodeOutOfRange(b));
        }
        is_blocked[b] = true;
    }
    for &s in seeds {
        if s >= n {
            return Err(Error::NodeOutOfRange(s));
        }
        if is_blocked[s] {
            return Err(invalid(format!("node {s} is both seed and blocked")));
        }
        adopted_at[s] = Some(0);
    }
    let mut adopted_count = adopted_at.iter().filter(|a| a.is_some()).count();
    // Adopted-neighbor counts as of the previous step.
    let mut pressure = vec![0u32; n];
    for v in 0..n {
        if adopted_at[v].is_some() {
            for &w in g.neighbors(v) {
                pressure[w] += 1;
            }
        }
    }
    let nf = n.max(1) as f64;
    let mut eta = vec![adopted_count as f64 / nf];
    let mut newly = Vec::new();
    for t in 1..=params.steps {
        newly.clear();
        for v in 0..n {
            let r: f64 = if params.delta > 0.0 { rng.random() } else { 1.0 };
            if adopted_at[v].is_some() || is_blocked[v] {
                continue;
            }
            // Isolated nodes have no neighborhood to respond to.
            let deg = g.degree(v);
            let by_threshold = deg > 0 && pressure[v] as f64 / deg as f64 >= params.tau;
            if by_threshold || r < params.delta {
                newly.push(v);
            }
        }
        for &v in &newly {
            adopted_at[v] = Some(t as u32);
            for &w in g.neighbors(v) {
                pressure[w] += 1;
            }
        }
        adopted_count += newly.len();
        eta.push(adopted_count as f64 / nf);
        if newly.is_empty() && params.delta == 0.0 {
            break;
        }
    }
    let steady_step = eta.iter().position(|&e| e >= params.steady_fraction);
    Ok(DiffusionTrace {
        adopted_at,
        blocked: is_blocked,
        eta,
        steady_step,
        steady_fraction: params.steady_fraction,
        max_steps: params.steps,
    })
}

/// Seeds, blocks and runs one cascade from a single stream.
pub fn kt_simulate(g: &Graph, params: &KtParams, strategy: &SeedStrategy, rng: &mut SimRng) -> Result<DiffusionTrace> {
    let seeds = select_seeds(g, strategy, rng)?;
    let blocked = select_blocked(g, params.beta, &seeds, rng)?;
    kt_run(g, params, &seeds, &blocked, rng)
}

/// η(t) = infected / total at step `t`.
pub fn fraction_infected(trace: &DiffusionTrace, t: usize) -> Result<f64> {
    trace
        .eta
        .get(t)
        .copied()
        .ok_or_else(|| invalid(format!("step {t} outside recorded range 0..={}", trace.last_step())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpeedStatus {
    /// Steady fraction reached at `steady_step > 0`.
    Saturated,
    /// Never reached within the step budget; speed uses the final η.
    Unsaturated,
    /// Already at steady state at step 0; speed is defined as zero.
    AlreadySteady,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionSpeed {
    pub nu: f64,
    pub status: SpeedStatus,
}

/// Average diffusion speed ν = (η(s) − η(0)) / t_s.
pub fn diffusion_speed(trace: &DiffusionTrace) -> DiffusionSpeed {
    let eta0 = trace.eta[0];
    match trace.steady_step {
        Some(0) => DiffusionSpeed { nu: 0.0, status: SpeedStatus::AlreadySteady },
        Some(ts) => DiffusionSpeed {
            nu: (trace.steady_fraction - eta0) / ts as f64,
            status: SpeedStatus::Saturated,
        },
        None => {
            let k = trace.max_steps;
            let eta_k = trace.curve(k + 1)[k];
            DiffusionSpeed { nu: (eta_k - eta0) / k as f64, status: SpeedStatus::Unsaturated }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    fn params(tau: f64, delta: f64, steps: usize) -> KtParams {
        KtParams { eta0: 0.0, steps, delta, beta: 0.0, tau, steady_fraction: 0.95 }
    }

    #[test]
    fn zero_threshold_adopts_everything_at_step_one() {
        let g = Graph::cycle(8);
        let tr = kt_run(&g, &params(0.0, 0.0, 10), &[0], &[], &mut rng_from_seed(1)).unwrap();
        assert_eq!(tr.eta[1], 1.0);
        assert_eq!(tr.adopted_set(1).len(), 8);
    }

    #[test]
    fn unreachable_threshold_freezes_seeds() {
        let g = Graph::complete(5);
        let tr = kt_run(&g, &params(1.01, 0.0, 10), &[2], &[], &mut rng_from_seed(1)).unwrap();
        for t in 0..=tr.last_step() {
            assert_eq!(tr.adopted_set(t), vec![2]);
        }
        let s = diffusion_speed(&tr);
        assert_eq!(s.status, SpeedStatus::Unsaturated);
        assert_eq!(s.nu, 0.0);
    }

    #[test]
    fn path_front_advances_one_node_per_step() {
        let g = Graph::path(4);
        let tr = kt_run(&g, &params(0.5, 0.0, 10), &[0], &[], &mut rng_from_seed(1)).unwrap();
        assert_eq!(tr.adopted_set(1), vec![0, 1]);
        assert_eq!(tr.adopted_set(2), vec![0, 1, 2]);
        assert_eq!(tr.adopted_set(3), vec![0, 1, 2, 3]);
        assert_eq!(tr.eta[..4], [0.25, 0.5, 0.75, 1.0]);
        assert_eq!(tr.steady_step, Some(3));
        let s = diffusion_speed(&tr);
        assert_eq!(s.status, SpeedStatus::Saturated);
        assert!((s.nu - (0.95 - 0.25) / 3.0).abs() < 1e-15);
        assert_eq!(fraction_infected(&tr, 0).unwrap(), 0.25);
        assert!(fraction_infected(&tr, 99).is_err());
    }

    #[test]
    fn speed_arithmetic() {
        let mut eta = vec![0.01; 48];
        eta[47] = 0.95;
        let tr = DiffusionTrace {
            adopted_at: vec![],
            blocked: vec![],
            eta,
            steady_step: Some(47),
            steady_fraction: 0.95,
            max_steps: 500,
        };
        assert!((diffusion_speed(&tr).nu - 0.02).abs() < 1e-15);
        let full = kt_run(&Graph::complete(3), &params(0.0, 0.0, 5), &[0, 1, 2], &[], &mut rng_from_seed(0)).unwrap();
        assert_eq!(diffusion_speed(&full), DiffusionSpeed { nu: 0.0, status: SpeedStatus::AlreadySteady });
    }

    #[test]
    fn seed_selection() {
        let mut rng = rng_from_seed(3);
        let star = Graph::star(4);
        assert_eq!(select_seeds(&star, &SeedStrategy::new(SeedKind::TopDegree, 0.25), &mut rng).unwrap(), vec![0]);
        assert_eq!(select_seeds(&star, &SeedStrategy::new(SeedKind::TopBetweenness, 0.25), &mut rng).unwrap(), vec![0]);
        let k = Graph::complete(10);
        assert_eq!(
            select_seeds(&k, &SeedStrategy::new(SeedKind::TopBetweenness, 0.3), &mut rng).unwrap(),
            vec![0, 1, 2]
        );
        assert_eq!(SeedStrategy::new(SeedKind::TopDegree, 0.01).count(300).unwrap(), 3);
        let r = select_seeds(&k, &SeedStrategy::new(SeedKind::Random, 0.5), &mut rng).unwrap();
        assert_eq!(r.len(), 5);
        assert!(SeedStrategy::new(SeedKind::Random, 0.0).count(10).is_err());
        assert!(SeedStrategy::new(SeedKind::Random, 1.5).count(10).is_err());
        assert!(select_seeds(&Graph::empty(0), &SeedStrategy::new(SeedKind::Random, 0.5), &mut rng).is_err());
    }

    #[test]
    fn blocked_selection() {
        let mut rng = rng_from_seed(4);
        let g = Graph::empty(100);
        assert!(select_blocked(&g, 0.0, &[0], &mut rng).unwrap().is_empty());
        let seeds = [0, 1, 2];
        for _ in 0..1000 {
            let b = select_blocked(&g, 0.05, &seeds, &mut rng).unwrap();
            assert_eq!(b.len(), 5);
            assert!(b.iter().all(|v| !seeds.contains(v)));
        }
        assert!(select_blocked(&Graph::empty(4), 1.0, &[0], &mut rng).is_err());
    }

    #[test]
    fn rejects_overlapping_seed_and_block() {
        let g = Graph::path(3);
        assert!(kt_run(&g, &params(0.5, 0.0, 3), &[1], &[1], &mut rng_from_seed(0)).is_err());
    }

    #[test]
    fn isolated_nodes_only_adopt_spontaneously() {
        let g = Graph::empty(50);
        let tr = kt_run(&g, &params(0.0, 0.0, 5), &[0], &[], &mut rng_from_seed(0)).unwrap();
        assert_eq!(tr.adopted_set(tr.last_step()), vec![0]);
        let tr = kt_run(&g, &params(0.0, 0.5, 20), &[0], &[], &mut rng_from_seed(0)).unwrap();
        assert!(tr.eta[20] > 0.9);
    }

    #[test]
    fn single_node_graph_seeded() {
        let g = Graph::empty(1);
        let tr = kt_run(&g, &KtParams { beta: 0.0, ..KtParams::default() }, &[0], &[], &mut rng_from_seed(0)).unwrap();
        assert!(tr.eta.iter().all(|&e| e == 1.0));
    }
}
