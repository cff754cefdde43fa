//! `netdiff`: generate networks, run KT and SI diffusion, census motifs,
//! infer SI parameters and run the ensemble experiments.

mod meta;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use netdiff_core::generators::{GeneratorSpec, PointDistribution};
use netdiff_core::graph::Graph;
use netdiff_core::io::{
    ingest_coordinates, ingest_covariates, ingest_edge_covariate, ingest_edge_list, ingest_event_log, ingest_priors,
    write_atomic, write_coordinates, write_edge_list, write_event_log,
};
use netdiff_core::kt::{KtParams, SeedKind, SeedStrategy};
use netdiff_core::mcmc::{posterior_summary, run_chains, si_log_likelihood_fn, ChainConfig, SiParamLayout};
use netdiff_core::motif::{census, concentration};
use netdiff_core::rng::{rng_from_seed, stream_rng};
use netdiff_core::si::{simulate_si, CovariateSet, DistanceProvider, SiParams, SimulationLimits};
use netdiff_core::stats::{
    ad_k_sample, bootstrap_bands, infection_bands, kt_curves, kt_curves_on_graph, motif_speed_experiment,
    BandMethod, BandedCurve, CurveEnsemble, MotifSpeedConfig,
};
use rand::Rng;
use serde::Serialize;
use serde_json::json;

use meta::{digests, elapsed_secs, write_sidecar, ResultMetadata};

#[derive(Parser)]
#[command(name = "netdiff", version, about = "Diffusion simulation and inference on complex networks")]
struct Cli {
    /// Only log errors.
    #[arg(short, long, global = true, conflicts_with = "verbose")]
    quiet: bool,
    /// More logging; repeat for trace output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random network.
    Generate(GenerateArgs),
    /// Run the KT threshold cascade on a network.
    SimulateKt(SimulateKtArgs),
    /// Edge-disjoint 4-node motif census.
    Motifs(MotifsArgs),
    /// Simulate an SI epidemic and write its event log.
    SimulateSi(SimulateSiArgs),
    /// Sample the SI posterior from an observed event log.
    InferSi(InferSiArgs),
    /// Statistical tests on result files.
    #[command(subcommand)]
    Stats(StatsCommand),
    /// Batch experiments over many generated graphs.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
}

#[derive(Subcommand)]
enum StatsCommand {
    /// k-sample Anderson-Darling test.
    AdTest(AdTestArgs),
}

#[derive(Subcommand)]
enum ExperimentCommand {
    /// Correlate KT diffusion speed with motif concentrations on planted-partition graphs.
    MotifSpeed(MotifSpeedArgs),
    /// Mean KT curve with bands over freshly generated graphs.
    KtCurves(KtCurvesArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Kind {
    Er,
    Grg,
    Dt,
    Sbm,
}

impl std::fmt::Display for Kind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.to_possible_value().expect("no skipped variants").get_name())
    }
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Points {
    Normal,
    Uniform,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Strategy {
    Random,
    Degree,
    Betweenness,
}

impl From<Strategy> for SeedKind {
    fn from(s: Strategy) -> Self {
        match s {
            Strategy::Random => SeedKind::Random,
            Strategy::Degree => SeedKind::TopDegree,
            Strategy::Betweenness => SeedKind::TopBetweenness,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Distance {
    Hops,
    Euclidean,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Resample {
    Percentile,
    Bootstrap,
}

#[derive(Args, Debug, Serialize)]
struct GraphArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    /// Node count (total across blocks for sbm).
    #[arg(long)]
    n: usize,
    /// Edge probability (er).
    #[arg(long)]
    p: Option<f64>,
    /// Connection radius (grg).
    #[arg(long)]
    r: Option<f64>,
    /// Number of equal blocks (sbm).
    #[arg(long)]
    blocks: Option<usize>,
    /// Within-block probability (sbm).
    #[arg(long)]
    pw: Option<f64>,
    /// Between-block probability (sbm).
    #[arg(long)]
    pb: Option<f64>,
    /// Point distribution (dt).
    #[arg(long, value_enum)]
    points: Option<Points>,
}

impl GraphArgs {
    fn spec(&self) -> Result<GeneratorSpec> {
        let given = [
            ("--p", self.p.is_some()),
            ("--r", self.r.is_some()),
            ("--blocks", self.blocks.is_some()),
            ("--pw", self.pw.is_some()),
            ("--pb", self.pb.is_some()),
            ("--points", self.points.is_some()),
        ];
        let allowed: &[&str] = match self.kind {
            Kind::Er => &["--p"],
            Kind::Grg => &["--r"],
            Kind::Dt => &["--points"],
            Kind::Sbm => &["--blocks", "--pw", "--pb"],
        };
        for (flag, set) in given {
            if set && !allowed.contains(&flag) {
                bail!("{flag} does not apply to --kind {}", self.kind);
            }
        }
        let need = |v: Option<f64>, flag: &str| v.with_context(|| format!("--kind {} requires {flag}", self.kind));
        let spec = match self.kind {
            Kind::Er => GeneratorSpec::ErdosRenyi { n: self.n, p: need(self.p, "--p")? },
            Kind::Grg => GeneratorSpec::Geometric { n: self.n, radius: need(self.r, "--r")? },
            Kind::Dt => GeneratorSpec::Delaunay {
                n: self.n,
                points: match self.points.unwrap_or(Points::Normal) {
                    Points::Normal => PointDistribution::StandardNormal,
                    Points::Uniform => PointDistribution::UniformSquare,
                },
            },
            Kind::Sbm => {
                let blocks = self.blocks.context("--kind sbm requires --blocks")?;
                if blocks == 0 || !self.n.is_multiple_of(blocks) {
                    bail!("--n {} is not divisible into {blocks} equal blocks", self.n);
                }
                GeneratorSpec::planted_partition(blocks, self.n / blocks, need(self.pw, "--pw")?, need(self.pb, "--pb")?)
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Args, Debug, Serialize)]
struct KtArgs {
    /// Initially infected fraction, chosen by the seed strategy.
    #[arg(long, default_value_t = 0.01)]
    eta0: f64,
    #[arg(long, default_value_t = 500)]
    steps: usize,
    /// Spontaneous adoption probability per step.
    #[arg(long, default_value_t = 0.001)]
    delta: f64,
    /// Blocked fraction.
    #[arg(long, default_value_t = 0.05)]
    beta: f64,
    #[arg(long, default_value_t = 0.30)]
    tau: f64,
    #[arg(long, value_enum, default_value = "degree")]
    seed_strategy: Strategy,
}

impl KtArgs {
    fn params(&self) -> Result<(KtParams, SeedStrategy)> {
        let params = KtParams {
            eta0: self.eta0,
            steps: self.steps,
            delta: self.delta,
            beta: self.beta,
            tau: self.tau,
            ..KtParams::default()
        };
        params.validate()?;
        Ok((params, SeedStrategy::new(self.seed_strategy.into(), self.eta0)))
    }
}

#[derive(Args, Debug, Serialize)]
struct BandArgs {
    /// How the 95% band is formed across runs.
    #[arg(long, value_enum, default_value = "percentile")]
    resample: Resample,
    /// Bootstrap resamples when --resample bootstrap.
    #[arg(long, default_value_t = 1000)]
    resamples: usize,
}

#[derive(Args, Debug, Serialize)]
struct GenerateArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
    /// Also write node coordinates (grg, dt).
    #[arg(long)]
    coords: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct SimulateKtArgs {
    #[arg(long)]
    edges: PathBuf,
    #[command(flatten)]
    kt: KtArgs,
    #[arg(long, default_value_t = 1)]
    runs: usize,
    #[command(flatten)]
    band: BandArgs,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct MotifsArgs {
    #[arg(long)]
    edges: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct SimulateSiArgs {
    #[arg(long)]
    edges: PathBuf,
    /// Node coordinates, required for --distance euclidean.
    #[arg(long)]
    coords: Option<PathBuf>,
    /// Transmissibility covariates; normalized centralities when absent.
    #[arg(long)]
    covariates: Option<PathBuf>,
    #[arg(long)]
    edge_cov: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "hops")]
    distance: Distance,
    #[arg(long, default_value_t = 0.0)]
    zeta: f64,
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Comma-separated transmissibility coefficients, one per covariate column (default all 1).
    #[arg(long, value_delimiter = ',')]
    phi: Vec<f64>,
    /// Comma-separated edge-covariate coefficients.
    #[arg(long, value_delimiter = ',')]
    theta: Vec<f64>,
    /// Comma-separated labels infected at time 0 (default: one random node).
    #[arg(long, value_delimiter = ',')]
    initial: Vec<String>,
    #[arg(long)]
    horizon: Option<f64>,
    /// Stop once this many nodes are infected.
    #[arg(long)]
    max_infected: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct InferSiArgs {
    #[arg(long)]
    edges: PathBuf,
    #[arg(long)]
    events: PathBuf,
    #[arg(long)]
    covariates: Option<PathBuf>,
    #[arg(long)]
    edge_cov: Option<PathBuf>,
    #[arg(long)]
    coords: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "hops")]
    distance: Distance,
    #[arg(long)]
    priors: PathBuf,
    #[arg(long, default_value_t = 20_000)]
    iters: usize,
    #[arg(long, default_value_t = 2_000)]
    burnin: usize,
    #[arg(long, default_value_t = 2)]
    chains: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    summary: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct AdTestArgs {
    /// One sample per file, numbers in the first field (or --column).
    #[arg(long, num_args = 2.., required = true)]
    inputs: Vec<PathBuf>,
    /// Header name of the column to read.
    #[arg(long)]
    column: Option<String>,
    /// Write JSON here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct MotifSpeedArgs {
    #[arg(long, default_value_t = 0.03)]
    pw: f64,
    /// `start:stop:count`, inclusive and evenly spaced.
    #[arg(long, default_value = "0.001:0.01:10")]
    pb_grid: String,
    /// `<blocks>x<size>`.
    #[arg(long, default_value = "3x200")]
    blocks: String,
    #[arg(long, default_value_t = 1000)]
    runs: usize,
    #[command(flatten)]
    kt: KtArgs,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct KtCurvesArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    kt: KtArgs,
    #[arg(long, default_value_t = 1000)]
    runs: usize,
    #[command(flatten)]
    band: BandArgs,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = rand::rng().random();
        log::warn!("no --seed given, using {s} (recorded in metadata)");
        s
    })
}

/// Output file plus its metadata sidecar.
struct Emit<'a, C: Serialize> {
    command: &'a str,
    config: &'a C,
    seed: Option<u64>,
    start: Instant,
    inputs: Vec<&'a Path>,
    band_method: Option<&'static str>,
}

impl<C: Serialize> Emit<'_, C> {
    fn sidecar(&self, out: &Path) -> Result<()> {
        let meta = ResultMetadata {
            tool: "netdiff",
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            config: self.config,
            seed: self.seed,
            duration_secs: elapsed_secs(self.start.elapsed()),
            inputs: digests(&self.inputs)?,
            band_method: self.band_method,
        };
        write_sidecar(out, &meta)?;
        log::info!("wrote {}", out.display());
        Ok(())
    }
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    write_atomic(path, |w| {
        writeln!(w, "{text}")?;
        Ok(())
    })?;
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_curve(path: &Path, curve: &BandedCurve, with_bounds: bool) -> Result<()> {
    write_atomic(path, |w| {
        writeln!(w, "timestep,mean_eta,lo95,hi95")?;
        for t in 0..curve.mean.len() {
            if with_bounds {
                writeln!(w, "{t},{},{},{}", curve.mean[t], curve.lo[t], curve.hi[t])?;
            } else {
                writeln!(w, "{t},{},,", curve.mean[t])?;
            }
        }
        Ok(())
    })?;
    Ok(())
}

fn bands(ens: &CurveEnsemble, band: &BandArgs, seed: u64) -> Result<(BandedCurve, bool)> {
    if ens.run_count() < 2 {
        let mean = ens.runs()[0].clone();
        let curve = BandedCurve { lo: mean.clone(), hi: mean.clone(), mean, method: BandMethod::Percentile };
        return Ok((curve, false));
    }
    let curve = match band.resample {
        Resample::Percentile => infection_bands(ens)?,
        // Stream past any run index so the resampling draws stay independent.
        Resample::Bootstrap => bootstrap_bands(ens, band.resamples, &mut stream_rng(seed, u64::MAX))?,
    };
    Ok((curve, true))
}

fn generate(a: &GenerateArgs) -> Result<()> {
    let start = Instant::now();
    let spec = a.graph.spec()?;
    let seed = resolve_seed(a.seed);
    let g = spec.generate(seed)?;
    if a.coords.is_some() && g.coords().is_none() {
        bail!("--coords needs a spatial generator (grg or dt)");
    }
    write_edge_list(&g, &a.out)?;
    let emit = Emit { command: "generate", config: a, seed: Some(seed), start, inputs: vec![], band_method: None };
    emit.sidecar(&a.out)?;
    if let Some(c) = &a.coords {
        write_coordinates(&g, c)?;
        emit.sidecar(c)?;
    }
    log::info!("{} nodes, {} edges", g.node_count(), g.edge_count());
    Ok(())
}

fn simulate_kt(a: &SimulateKtArgs) -> Result<()> {
    let start = Instant::now();
    let (params, strategy) = a.kt.params()?;
    if a.runs == 0 {
        bail!("--runs must be at least 1");
    }
    let seed = resolve_seed(a.seed);
    let g = ingest_edge_list(&a.edges)?;
    let ens = kt_curves_on_graph(&g, a.runs, &params, &strategy, seed)?;
    let (curve, with_bounds) = bands(&ens, &a.band, seed)?;
    write_curve(&a.out, &curve, with_bounds)?;
    Emit {
        command: "simulate-kt",
        config: a,
        seed: Some(seed),
        start,
        inputs: vec![&a.edges],
        band_method: with_bounds.then(|| curve.method.name()),
    }
    .sidecar(&a.out)
}

fn motifs(a: &MotifsArgs) -> Result<()> {
    let start = Instant::now();
    let g = ingest_edge_list(&a.edges)?;
    let c = census(&g);
    let counts: serde_json::Map<String, serde_json::Value> =
        c.counts().into_iter().map(|(k, n)| (k.name().to_string(), json!(n))).collect();
    let conc: serde_json::Map<String, serde_json::Value> = match concentration(&c) {
        Ok(m) => m.into_iter().map(|(k, v)| (k.name().to_string(), json!(v))).collect(),
        Err(e) => {
            log::warn!("{e}; concentrations left empty");
            Default::default()
        }
    };
    let body = json!({
        "counts": counts,
        "concentrations": conc,
        "used_edges": c.used_edges.len(),
        "total_edges": c.total_edges,
    });
    write_json(&a.out, &body)?;
    Emit { command: "motifs", config: a, seed: None, start, inputs: vec![&a.edges], band_method: None }.sidecar(&a.out)
}

/// Graph, covariates and distances shared by the SI commands.
fn si_inputs(
    edges: &Path,
    coords: Option<&Path>,
    covariates: Option<&Path>,
    edge_cov: Option<&Path>,
    distance: Distance,
) -> Result<(Graph, CovariateSet, DistanceProvider)> {
    let mut g = ingest_edge_list(edges)?;
    if let Some(c) = coords {
        g = ingest_coordinates(c, g)?;
    }
    let mut cov = match covariates {
        Some(p) => ingest_covariates(p, &g)?,
        None => CovariateSet::centralities(&g),
    };
    if let Some(p) = edge_cov {
        cov = cov.with_edge_covariate(ingest_edge_covariate(p, &g)?);
    }
    let dist = match distance {
        Distance::Hops => DistanceProvider::hops(&g),
        Distance::Euclidean => DistanceProvider::euclidean(&g).context("--distance euclidean needs --coords")?,
    };
    Ok((g, cov, dist))
}

fn simulate_si_cmd(a: &SimulateSiArgs) -> Result<()> {
    let start = Instant::now();
    let (g, cov, dist) =
        si_inputs(&a.edges, a.coords.as_deref(), a.covariates.as_deref(), a.edge_cov.as_deref(), a.distance)?;
    let width = cov.transmissibility.first().map_or(0, Vec::len);
    let phi = if a.phi.is_empty() { vec![1.0; width] } else { a.phi.clone() };
    let params = SiParams {
        zeta: a.zeta,
        alpha: a.alpha,
        gamma: a.gamma,
        theta: a.theta.clone(),
        phi,
        omega: vec![1.0],
    };
    let seed = resolve_seed(a.seed);
    let mut rng = rng_from_seed(seed);
    let index = g.label_index();
    let initial = if a.initial.is_empty() {
        if g.node_count() == 0 {
            bail!("empty graph");
        }
        vec![rng.random_range(0..g.node_count())]
    } else {
        a.initial
            .iter()
            .map(|l| index.get(l.as_str()).copied().with_context(|| format!("unknown node label {l:?}")))
            .collect::<Result<_>>()?
    };
    if a.horizon.is_none() && a.max_infected.is_none() {
        log::info!("no --horizon or --max-infected: running until no susceptible node can be infected");
    }
    let limits = SimulationLimits { horizon: a.horizon.unwrap_or(f64::INFINITY), max_infected: a.max_infected };
    let sim = simulate_si(&g, &params, &cov, &dist, &initial, limits, &mut rng)?;
    log::info!("{} infected, stopped: {:?}", sim.log.infected_count(), sim.status);
    write_event_log(&g, &sim.log, &a.out)?;
    let mut inputs: Vec<&Path> = vec![&a.edges];
    inputs.extend([&a.coords, &a.covariates, &a.edge_cov].into_iter().flatten().map(PathBuf::as_path));
    Emit { command: "simulate-si", config: a, seed: Some(seed), start, inputs, band_method: None }.sidecar(&a.out)
}

fn infer_si(a: &InferSiArgs) -> Result<()> {
    let start = Instant::now();
    let (g, cov, dist) =
        si_inputs(&a.edges, a.coords.as_deref(), a.covariates.as_deref(), a.edge_cov.as_deref(), a.distance)?;
    let log = ingest_event_log(&a.events, &g)?;
    let prior = ingest_priors(&a.priors)?;
    let width = cov.transmissibility.first().map_or(0, Vec::len);
    // Parameters without a prior stay at these values.
    let base = SiParams {
        zeta: 0.0,
        alpha: 1.0,
        gamma: 1.0,
        theta: vec![0.0; cov.edge.len()],
        phi: vec![1.0; width],
        omega: vec![1.0],
    };
    let layout = SiParamLayout::new(&prior.names, base)?;
    let seed = resolve_seed(a.seed);
    let lik = si_log_likelihood_fn(&layout, &g, &cov, &dist, &log);
    let chains = run_chains(a.chains, seed, &ChainConfig::new(a.iters, a.burnin), &prior, &lik)?;
    let summary = posterior_summary(&chains)?;
    let kept: usize = chains.iter().map(|c| c.kept().len()).sum();
    let acceptance = chains.iter().map(|c| c.kept_acceptance_rate() * c.kept().len() as f64).sum::<f64>() / kept as f64;
    let params: serde_json::Map<String, serde_json::Value> = summary
        .iter()
        .map(|s| (s.name.clone(), json!({"mean": s.mean, "ci_lo": s.ci_lo, "ci_hi": s.ci_hi})))
        .collect();
    let body = json!({
        "parameters": params,
        "acceptance_rate": acceptance,
        "chains": a.chains,
        "iterations": a.iters,
        "burn_in": a.burnin,
        "kept_samples": kept,
    });
    write_json(&a.summary, &body)?;
    let mut inputs: Vec<&Path> = vec![&a.edges, &a.events, &a.priors];
    inputs.extend([&a.coords, &a.covariates, &a.edge_cov].into_iter().flatten().map(PathBuf::as_path));
    let emit = Emit { command: "infer-si", config: a, seed: Some(seed), start, inputs, band_method: None };
    emit.sidecar(&a.summary)?;
    if let Some(path) = &a.trace {
        write_atomic(path, |w| {
            writeln!(w, "chain,{},log_post", prior.names.join(","))?;
            for (c, chain) in chains.iter().enumerate() {
                for (s, lp) in chain.kept().iter().zip(chain.kept_log_posts()) {
                    let vals: Vec<String> = s.iter().map(f64::to_string).collect();
                    writeln!(w, "{c},{},{lp}", vals.join(","))?;
                }
            }
            Ok(())
        })?;
        emit.sidecar(path)?;
    }
    log::info!("acceptance {acceptance:.3}");
    Ok(())
}

fn read_sample(path: &Path, column: Option<&str>) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let mut idx = 0;
    if let Some(name) = column {
        let (_, header) = lines.next().with_context(|| format!("{}: empty file", path.display()))?;
        idx = header
            .split(',')
            .position(|h| h.trim() == name)
            .with_context(|| format!("{}: no column {name:?}", path.display()))?;
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let field = line.split(',').nth(idx).unwrap_or("").trim();
        match field.parse::<f64>() {
            Ok(v) => out.push(v),
            // Tolerate a header row when no column was named.
            Err(_) if column.is_none() && out.is_empty() && i == 0 => {}
            Err(_) => bail!("{}:{}: bad number {field:?}", path.display(), i + 1),
        }
    }
    Ok(out)
}

fn ad_test(a: &AdTestArgs) -> Result<()> {
    let start = Instant::now();
    let samples =
        a.inputs.iter().map(|p| read_sample(p, a.column.as_deref())).collect::<Result<Vec<_>>>()?;
    let refs: Vec<&[f64]> = samples.iter().map(Vec::as_slice).collect();
    let r = ad_k_sample(&refs)?;
    let body = json!({"statistic": r.statistic, "p_value": r.p_value});
    match &a.out {
        Some(path) => {
            write_json(path, &body)?;
            let inputs = a.inputs.iter().map(PathBuf::as_path).collect();
            Emit { command: "stats ad-test", config: a, seed: None, start, inputs, band_method: None }.sidecar(path)
        }
        None => {
            println!("{}", serde_json::to_string_pretty(&body)?);
            Ok(())
        }
    }
}

fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts[..] else { bail!("--pb-grid must be start:stop:count, got {s:?}") };
    let (a, b): (f64, f64) = (a.parse()?, b.parse()?);
    let n: usize = n.parse()?;
    if n < 2 {
        bail!("--pb-grid needs at least 2 points");
    }
    Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect())
}

fn parse_blocks(s: &str) -> Result<(usize, usize)> {
    let (k, size) = s.split_once(['x', 'X']).with_context(|| format!("--blocks must be <count>x<size>, got {s:?}"))?;
    Ok((k.trim().parse()?, size.trim().parse()?))
}

fn motif_speed(a: &MotifSpeedArgs) -> Result<()> {
    let start = Instant::now();
    let (blocks, block_size) = parse_blocks(&a.blocks)?;
    let (kt, strategy) = a.kt.params()?;
    let seed = resolve_seed(a.seed);
    let cfg = MotifSpeedConfig { blocks, block_size, pw: a.pw, pb_grid: parse_grid(&a.pb_grid)?, runs: a.runs, kt, strategy, seed };
    let rows = motif_speed_experiment(&cfg)?;
    write_atomic(&a.out, |w| {
        writeln!(w, "motif,mean_corr,sd_corr")?;
        for r in &rows {
            writeln!(w, "{},{},{}", r.motif.name(), opt(r.mean_corr), opt(r.sd_corr))?;
        }
        Ok(())
    })?;
    Emit { command: "experiment motif-speed", config: a, seed: Some(seed), start, inputs: vec![], band_method: None }
        .sidecar(&a.out)
}

fn kt_curves_cmd(a: &KtCurvesArgs) -> Result<()> {
    let start = Instant::now();
    let spec = a.graph.spec()?;
    let (params, strategy) = a.kt.params()?;
    if a.runs == 0 {
        bail!("--runs must be at least 1");
    }
    let seed = resolve_seed(a.seed);
    let ens = kt_curves(&spec, a.runs, &params, &strategy, seed)?;
    let (curve, with_bounds) = bands(&ens, &a.band, seed)?;
    write_curve(&a.out, &curve, with_bounds)?;
    Emit {
        command: "experiment kt-curves",
        config: a,
        seed: Some(seed),
        start,
        inputs: vec![],
        band_method: with_bounds.then(|| curve.method.name()),
    }
    .sidecar(&a.out)
}

fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var("NETDIFF_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().with_context(|| format!("NETDIFF_THREADS={v:?} is not a number"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    init_threads()?;
    match &cli.command {
        Command::Generate(a) => generate(a),
        Command::SimulateKt(a) => simulate_kt(a),
        Command::Motifs(a) => motifs(a),
        Command::SimulateSi(a) => simulate_si_cmd(a),
        Command::InferSi(a) => infer_si(a),
        Command::Stats(StatsCommand::AdTest(a)) => ad_test(a),
        Command::Experiment(ExperimentCommand::MotifSpeed(a)) => motif_speed(a),
        Command::Experiment(ExperimentCommand::KtCurves(a)) => kt_curves_cmd(a),
    }
}

fn main() {
    let cli = Cli::parse();
    let level = match (cli.quiet, cli.verbose) {
        (true, _) => "error",
        (false, 0) => "warn",
        (false, 1) => "info",
        (false, 2) => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Err(e) = run(&cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
