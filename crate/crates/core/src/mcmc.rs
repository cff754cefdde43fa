//! Random-walk Metropolis–Hastings with independent Gaussian steps.
//!
//! Proposal scales adapt during burn-in only and are frozen afterwards, so
//! the kept samples come from a fixed symmetric kernel. Acceptance compares
//! log posteriors; raw likelihoods are never exponentiated.

use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::graph::Graph;
use crate::rng::{stream_rng, SimRng};
use crate::si::{CovariateSet, DistanceProvider, EventLog, SiModel, SiParams};

pub const MAX_INIT_DRAWS: usize = 10_000;
pub const MIN_SUMMARY_SAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Prior {
    Uniform { lo: f64, hi: f64 },
    Exponential { rate: f64 },
    /// Point mass; the coordinate is never moved by the sampler.
    Fixed(f64),
}

impl Prior {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Prior::Uniform { lo, hi } if !(lo < hi) => Err(invalid(format!("uniform prior needs lo < hi, got ({lo}, {hi})"))),
            Prior::Exponential { rate } if !(rate > 0.0) => Err(invalid(format!("exponential prior needs rate > 0, got {rate}"))),
            Prior::Fixed(v) if !v.is_finite() => Err(invalid("fixed value must be finite")),
            _ => Ok(()),
        }
    }

    pub fn log_density(&self, x: f64) -> f64 {
        match *self {
            Prior::Uniform { lo, hi } => {
                if (lo..=hi).contains(&x) {
                    -(hi - lo).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            Prior::Exponential { rate } => {
                if x >= 0.0 {
                    rate.ln() - rate * x
                } else {
                    f64::NEG_INFINITY
                }
            }
            Prior::Fixed(v) => {
                if x == v {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    pub fn sample(&self, rng: &mut SimRng) -> f64 {
        match *self {
            Prior::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            Prior::Exponential { rate } => Exp::new(rate).expect("validated rate").sample(rng),
            Prior::Fixed(v) => v,
        }
    }

    /// A sensible initial random-walk step for this prior.
    pub fn default_scale(&self) -> f64 {
        match *self {
            Prior::Uniform { lo, hi } => (hi - lo) / 10.0,
            Prior::Exponential { rate } => 0.1 / rate,
            Prior::Fixed(_) => 0.0,
        }
    }
}

/// Named independent priors, one per parameter coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorSpec {
    pub names: Vec<String>,
    pub priors: Vec<Prior>,
}

impl PriorSpec {
    pub fn new(entries: impl IntoIterator<Item = (impl Into<String>, Prior)>) -> Result<Self> {
        let (names, priors): (Vec<String>, Vec<Prior>) = entries.into_iter().map(|(n, p)| (n.into(), p)).unzip();
        for p in &priors {
            p.validate()?;
        }
        Ok(Self { names, priors })
    }

    pub fn dim(&self) -> usize {
        self.priors.len()
    }

    pub fn log_density(&self, theta: &[f64]) -> f64 {
        if theta.len() != self.priors.len() {
            return f64::NEG_INFINITY;
        }
        self.priors.iter().zip(theta).map(|(p, &x)| p.log_density(x)).sum()
    }

    pub fn sample(&self, rng: &mut SimRng) -> Vec<f64> {
        self.priors.iter().map(|p| p.sample(rng)).collect()
    }

    pub fn default_scales(&self) -> Vec<f64> {
        self.priors.iter().map(Prior::default_scale).collect()
    }
}

/// log L(θ) + log P(θ); −∞ outside the prior support, without calling the likelihood.
pub fn log_posterior<F>(theta: &[f64], prior: &PriorSpec, likelihood: F) -> f64
where
    F: Fn(&[f64]) -> f64,
{
    let lp = prior.log_density(theta);
    if lp == f64::NEG_INFINITY {
        return lp;
    }
    let ll = likelihood(theta);
    if ll.is_nan() {
        return f64::NEG_INFINITY;
    }
    ll + lp
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub theta: Vec<f64>,
    pub log_post: f64,
}

/// One Metropolis–Hastings transition. Returns the next state and whether the proposal was accepted.
pub fn mh_step<F>(
    current: &ChainState,
    scales: &[f64],
    prior: &PriorSpec,
    likelihood: &F,
    rng: &mut SimRng,
) -> (ChainState, bool)
where
    F: Fn(&[f64]) -> f64,
{
    let proposal: Vec<f64> = current
        .theta
        .iter()
        .zip(scales)
        .map(|(&x, &s)| {
            let z: f64 = rng.sample(StandardNormal);
            x + s * z
        })
        .collect();
    let log_post = log_posterior(&proposal, prior, likelihood);
    let u: f64 = rng.random();
    let diff = log_post - current.log_post;
    let accept = log_post > f64::NEG_INFINITY && (diff >= 0.0 || u.ln() < diff);
    if accept {
        (ChainState { theta: proposal, log_post }, true)
    } else {
        (current.clone(), false)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    pub iterations: usize,
    pub burn_in: usize,
    /// Starting point; drawn from the prior when absent.
    pub init: Option<Vec<f64>>,
    /// Initial proposal scales; prior-derived defaults when absent.
    pub scales: Option<Vec<f64>>,
    pub adapt: bool,
}

impl ChainConfig {
    pub fn new(iterations: usize, burn_in: usize) -> Self {
        Self { iterations, burn_in, init: None, scales: None, adapt: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub names: Vec<String>,
    pub samples: Vec<Vec<f64>>,
    pub log_posts: Vec<f64>,
    pub accepted: Vec<bool>,
    pub burn_in: usize,
    /// Scales in force after burn-in.
    pub proposal_scales: Vec<f64>,
}

impl Chain {
    pub fn kept(&self) -> &[Vec<f64>] {
        &self.samples[self.burn_in.min(self.samples.len())..]
    }

    pub fn kept_log_posts(&self) -> &[f64] {
        &self.log_posts[self.burn_in.min(self.log_posts.len())..]
    }

    pub fn acceptance_rate(&self) -> f64 {
        rate_of(&self.accepted)
    }

    pub fn kept_acceptance_rate(&self) -> f64 {
        rate_of(&self.accepted[self.burn_in.min(self.accepted.len())..])
    }
}

fn rate_of(flags: &[bool]) -> f64 {
    if flags.is_empty() {
        return 0.0;
    }
    flags.iter().filter(|&&a| a).count() as f64 / flags.len() as f64
}

const TARGET_ACCEPTANCE: f64 = 0.3;
const ADAPT_WINDOW: usize = 100;

/// Runs a single chain. During burn-in the scales are multiplied by
/// `exp((acc - 0.3) / sqrt(window))` after every window of 100 steps, and
/// rebased on the empirical spread of the burn-in samples once enough have
/// accumulated.
pub fn run_chain<F>(config: &ChainConfig, prior: &PriorSpec, likelihood: &F, rng: &mut SimRng) -> Result<Chain>
where
    F: Fn(&[f64]) -> f64,
{
    if config.iterations <= config.burn_in {
        return Err(invalid(format!(
            "iterations ({}) must exceed burn-in ({})",
            config.iterations, config.burn_in
        )));
    }
    let dim = prior.dim();
    let mut scales = config.scales.clone().unwrap_or_else(|| prior.default_scales());
    if scales.len() != dim {
        return Err(invalid(format!("{} proposal scales for {dim} parameters", scales.len())));
    }
    for (s, p) in scales.iter_mut().zip(&prior.priors) {
        if matches!(p, Prior::Fixed(_)) {
            *s = 0.0;
        }
    }
    let mut state = match &config.init {
        Some(theta) => {
            let log_post = log_posterior(theta, prior, likelihood);
            if !log_post.is_finite() {
                return Err(invalid("initial state has non-finite log posterior"));
            }
            ChainState { theta: theta.clone(), log_post }
        }
        None => {
            let mut found = None;
            for _ in 0..MAX_INIT_DRAWS {
                let theta = prior.sample(rng);
                let log_post = log_posterior(&theta, prior, likelihood);
                if log_post.is_finite() {
                    found = Some(ChainState { theta, log_post });
                    break;
                }
            }
            found.ok_or(Error::NoValidInit(MAX_INIT_DRAWS))?
        }
    };

    let mut chain = Chain {
        names: prior.names.clone(),
        samples: Vec::with_capacity(config.iterations),
        log_posts: Vec::with_capacity(config.iterations),
        accepted: Vec::with_capacity(config.iterations),
        burn_in: config.burn_in,
        proposal_scales: Vec::new(),
    };
    let mut window_accepts = 0usize;
    let mut windows = 0usize;
    for w in 0..config.iterations {
        let (next, accepted) = mh_step(&state, &scales, prior, likelihood, rng);
        state = next;
        chain.samples.push(state.theta.clone());
        chain.log_posts.push(state.log_post);
        chain.accepted.push(accepted);
        if config.adapt && w < config.burn_in {
            window_accepts += accepted as usize;
            if (w + 1) % ADAPT_WINDOW == 0 {
                windows += 1;
                let acc = window_accepts as f64 / ADAPT_WINDOW as f64;
                window_accepts = 0;
                let half = w.div_ceil(2);
                // Rebase on the spread of the second half of burn-in so far.
                if windows.is_multiple_of(5) && half >= 200 {
                    let recent = &chain.samples[half..];
                    let factor = 2.38 / (dim.max(1) as f64).sqrt();
                    for (j, s) in scales.iter_mut().enumerate() {
                        let sd = std_dev(recent.iter().map(|x| x[j]));
                        if sd > 0.0 && *s > 0.0 {
                            *s = factor * sd;
                        }
                    }
                } else {
                    let mult = ((acc - TARGET_ACCEPTANCE) / (windows as f64).sqrt()).exp();
                    for s in scales.iter_mut() {
                        *s *= mult;
                    }
                }
            }
        }
    }
    chain.proposal_scales = scales;
    log::debug!(
        "chain finished: acceptance {:.3} overall, {:.3} after burn-in",
        chain.acceptance_rate(),
        chain.kept_acceptance_rate()
    );
    Ok(chain)
}

/// Independent chains on streams `0..n_chains` of `seed`, run in parallel.
pub fn run_chains<F>(n_chains: usize, seed: u64, config: &ChainConfig, prior: &PriorSpec, likelihood: &F) -> Result<Vec<Chain>>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    (0..n_chains)
        .into_par_iter()
        .map(|c| run_chain(config, prior, likelihood, &mut stream_rng(seed, c as u64)))
        .collect()
}

fn std_dev(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = values.clone().count();
    if n < 2 {
        return 0.0;
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    (values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt()
}

/// Empirical quantile with linear interpolation between order statistics.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamSummary {
    pub name: String,
    pub mean: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl ParamSummary {
    pub fn contains(&self, x: f64) -> bool {
        self.ci_lo <= x && x <= self.ci_hi
    }
}

/// Mean and central 95% credible interval from post-burn-in samples of one or more chains.
pub fn posterior_summary(chains: &[Chain]) -> Result<Vec<ParamSummary>> {
    let first = chains.first().ok_or_else(|| Error::InsufficientData("no chains".into()))?;
    let kept: Vec<&Vec<f64>> = chains.iter().flat_map(|c| c.kept()).collect();
    if kept.len() < MIN_SUMMARY_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "{} post-burn-in samples, need at least {MIN_SUMMARY_SAMPLES}",
            kept.len()
        )));
    }
    Ok(first
        .names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let mut col: Vec<f64> = kept.iter().map(|s| s[j]).collect();
            // Offset by the first value so a constant column averages exactly.
            let mean = col[0] + col.iter().map(|v| v - col[0]).sum::<f64>() / col.len() as f64;
            col.sort_by(f64::total_cmp);
            ParamSummary {
                name: name.clone(),
                mean,
                ci_lo: quantile_sorted(&col, 0.025),
                ci_hi: quantile_sorted(&col, 0.975),
            }
        })
        .collect())
}

/// Maps sampler coordinates onto [`SiParams`] fields by name.
///
/// Recognized names are `zeta`, `alpha`, `gamma`, `phi1..`, `theta1..` and
/// `omega0..`; fields not named keep their value from the base parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SiParamLayout {
    slots: Vec<Slot>,
    base: SiParams,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Slot {
    Zeta,
    Alpha,
    Gamma,
    Phi(usize),
    Theta(usize),
    Omega(usize),
}

impl SiParamLayout {
    pub fn new(names: &[String], base: SiParams) -> Result<Self> {
        let indexed = |name: &str, prefix: &str, offset: usize, len: usize| -> Option<Result<usize>> {
            let k: usize = name.strip_prefix(prefix)?.parse().ok()?;
            Some(match k.checked_sub(offset) {
                Some(i) if i < len => Ok(i),
                _ => Err(invalid(format!("{name} is out of range for {len} coefficients"))),
            })
        };
        let slots = names
            .iter()
            .map(|name| match name.as_str() {
                "zeta" => Ok(Slot::Zeta),
                "alpha" => Ok(Slot::Alpha),
                "gamma" => Ok(Slot::Gamma),
                n => {
                    if let Some(i) = indexed(n, "phi", 1, base.phi.len()) {
                        i.map(Slot::Phi)
                    } else if let Some(i) = indexed(n, "theta", 1, base.theta.len()) {
                        i.map(Slot::Theta)
                    } else if let Some(i) = indexed(n, "omega", 0, base.omega.len()) {
                        i.map(Slot::Omega)
                    } else {
                        Err(invalid(format!("unknown SI parameter {n:?}")))
                    }
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { slots, base })
    }

    pub fn apply(&self, theta: &[f64]) -> SiParams {
        let mut p = self.base.clone();
        for (slot, &v) in self.slots.iter().zip(theta) {
            match *slot {
                Slot::Zeta => p.zeta = v,
                Slot::Alpha => p.alpha = v,
                Slot::Gamma => p.gamma = v,
                Slot::Phi(i) => p.phi[i] = v,
                Slot::Theta(i) => p.theta[i] = v,
                Slot::Omega(i) => p.omega[i] = v,
            }
        }
        p
    }
}

/// SI log-likelihood as a function of the sampled coordinates.
///
/// Parameter vectors that make any rate negative score −∞.
pub fn si_log_likelihood_fn<'a>(
    layout: &'a SiParamLayout,
    g: &'a Graph,
    cov: &'a CovariateSet,
    distances: &'a DistanceProvider,
    log: &'a EventLog,
) -> impl Fn(&[f64]) -> f64 + Sync + 'a {
    move |theta: &[f64]| {
        SiModel::new(g, &layout.apply(theta), cov, distances)
            .and_then(|m| m.log_likelihood(log))
            .unwrap_or(f64::NEG_INFINITY)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    fn unit() -> PriorSpec {
        PriorSpec::new([("x", Prior::Uniform { lo: 0.0, hi: 1.0 })]).unwrap()
    }

    #[test]
    fn log_posterior_examples() {
        let flat = |_: &[f64]| 0.0;
        assert_eq!(log_posterior(&[1.5], &unit(), flat), f64::NEG_INFINITY);
        assert_eq!(log_posterior(&[0.5], &unit(), flat), 0.0);
        let exp = PriorSpec::new([("zeta", Prior::Exponential { rate: 1e-4 })]).unwrap();
        let lp = log_posterior(&[1e-4], &exp, |_| -2.0);
        assert!((lp - ((1e-4f64).ln() - 1e-4 * 1e-4 - 2.0)).abs() < 1e-12);
        assert!(PriorSpec::new([("a", Prior::Uniform { lo: 1.0, hi: 1.0 })]).is_err());
        assert!(PriorSpec::new([("a", Prior::Exponential { rate: 0.0 })]).is_err());
    }

    #[test]
    fn step_acceptance_rules() {
        let mut rng = rng_from_seed(1);
        let cur = ChainState { theta: vec![0.5], log_post: 0.0 };
        // Equal posterior everywhere: always accepted.
        for _ in 0..200 {
            let (_, acc) = mh_step(&cur, &[0.01], &unit(), &|_: &[f64]| 0.0, &mut rng);
            assert!(acc);
        }
        // Out of support: always rejected, state duplicated exactly.
        let edge = ChainState { theta: vec![0.999999], log_post: 0.0 };
        for _ in 0..200 {
            let (next, acc) = mh_step(&edge, &[100.0], &unit(), &|_: &[f64]| 0.0, &mut rng);
            if !acc {
                assert_eq!(next, edge);
            }
        }
        let wide = PriorSpec::new([("x", Prior::Uniform { lo: -1e9, hi: 1e9 })]).unwrap();
        // Current state sits log 2 below every proposal.
        let far = ChainState { theta: vec![0.0], log_post: -(2e9f64).ln() - 2f64.ln() };
        for _ in 0..200 {
            let (_, acc) = mh_step(&far, &[100.0], &wide, &|_: &[f64]| 0.0, &mut rng);
            assert!(acc);
        }
        let never = ChainState { theta: vec![2.0], log_post: 0.0 };
        for _ in 0..50 {
            let (next, acc) = mh_step(&never, &[0.0], &unit(), &|_: &[f64]| 0.0, &mut rng);
            assert!(!acc);
            assert_eq!(next, never);
        }
    }

    #[test]
    fn zero_scale_chain_is_constant() {
        let cfg = ChainConfig { init: Some(vec![0.3]), scales: Some(vec![0.0]), adapt: false, ..ChainConfig::new(500, 100) };
        let chain = run_chain(&cfg, &unit(), &|_: &[f64]| 0.0, &mut rng_from_seed(3)).unwrap();
        assert!(chain.accepted.iter().all(|&a| a));
        assert!(chain.samples.iter().all(|s| s == &vec![0.3]));
        let s = posterior_summary(&[chain]).unwrap();
        assert_eq!((s[0].mean, s[0].ci_lo, s[0].ci_hi), (0.3, 0.3, 0.3));
    }

    #[test]
    fn same_seed_same_chain() {
        let cfg = ChainConfig::new(2000, 500);
        let lik = |t: &[f64]| -(t[0] - 0.2).powi(2);
        let a = run_chain(&cfg, &unit(), &lik, &mut rng_from_seed(11)).unwrap();
        let b = run_chain(&cfg, &unit(), &lik, &mut rng_from_seed(11)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_configs() {
        let lik = |_: &[f64]| 0.0;
        assert!(run_chain(&ChainConfig::new(10, 10), &unit(), &lik, &mut rng_from_seed(0)).is_err());
        let impossible = |_: &[f64]| f64::NEG_INFINITY;
        assert!(matches!(
            run_chain(&ChainConfig::new(10, 1), &unit(), &impossible, &mut rng_from_seed(0)),
            Err(Error::NoValidInit(_))
        ));
    }

    #[test]
    fn summary_needs_samples() {
        let cfg = ChainConfig { init: Some(vec![0.5]), ..ChainConfig::new(150, 100) };
        let chain = run_chain(&cfg, &unit(), &|_: &[f64]| 0.0, &mut rng_from_seed(0)).unwrap();
        assert!(posterior_summary(&[chain]).is_err());
    }

    #[test]
    fn symmetric_samples_have_zero_mean() {
        let chain = Chain {
            names: vec!["x".into()],
            samples: (0..200).map(|i| vec![if i % 2 == 0 { -1.0 } else { 1.0 }]).collect(),
            log_posts: vec![0.0; 200],
            accepted: vec![true; 200],
            burn_in: 0,
            proposal_scales: vec![1.0],
        };
        let s = posterior_summary(&[chain]).unwrap();
        assert_eq!(s[0].mean, 0.0);
        assert_eq!((s[0].ci_lo, s[0].ci_hi), (-1.0, 1.0));
    }

    #[test]
    fn si_layout_maps_names() {
        let base = SiParams { phi: vec![1.0, 1.0, 1.0], theta: vec![0.0], ..SiParams::default() };
        let names: Vec<String> = ["alpha", "gamma", "zeta", "phi2", "theta1", "omega0"].map(String::from).into();
        let layout = SiParamLayout::new(&names, base).unwrap();
        let p = layout.apply(&[0.1, 2.0, 1e-4, 3.0, 0.5, 0.9]);
        assert_eq!((p.alpha, p.gamma, p.zeta), (0.1, 2.0, 1e-4));
        assert_eq!(p.phi, vec![1.0, 3.0, 1.0]);
        assert_eq!((p.theta[0], p.omega[0]), (0.5, 0.9));
        assert!(SiParamLayout::new(&["phi4".to_string()], SiParams::default()).is_err());
        assert!(SiParamLayout::new(&["beta".to_string()], SiParams::default()).is_err());
    }
}
