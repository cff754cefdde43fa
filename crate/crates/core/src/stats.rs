//! Ensemble statistics and the experiment drivers built on them.

use rand::{Rng, RngCore};
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::generators::GeneratorSpec;
use crate::graph::Graph;
use crate::kt::{diffusion_speed, kt_simulate, KtParams, SeedStrategy};
use crate::mcmc::quantile_sorted;
use crate::motif::{census, concentration, MotifKind};
use crate::rng::{stream_rng, SimRng};

/// η curves of `N` runs over `T` steps; `runs[i][t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveEnsemble {
    runs: Vec<Vec<f64>>,
}

impl CurveEnsemble {
    pub fn new(runs: Vec<Vec<f64>>) -> Result<Self> {
        let t = runs.first().map_or(0, Vec::len);
        if runs.iter().any(|r| r.len() != t) {
            return Err(invalid("all curves in an ensemble must have the same length"));
        }
        if runs.iter().flatten().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(invalid("curve values must lie in [0, 1]"));
        }
        Ok(Self { runs })
    }

    pub fn run_count(&self) -> usize {
        self.runs.len()
    }

    pub fn steps(&self) -> usize {
        self.runs.first().map_or(0, Vec::len)
    }

    pub fn runs(&self) -> &[Vec<f64>] {
        &self.runs
    }

    /// Values of every run at step `t`.
    pub fn column(&self, t: usize) -> Vec<f64> {
        self.runs.iter().map(|r| r[t]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandMethod {
    /// Percentiles across independent runs.
    Percentile,
    /// Percentiles of the mean over runs resampled with replacement.
    Bootstrap,
}

impl BandMethod {
    pub fn name(self) -> &'static str {
        match self {
            BandMethod::Percentile => "percentile",
            BandMethod::Bootstrap => "bootstrap",
        }
    }
}

/// Mean curve with a 95% band.
///
/// Bands are widened to include the mean at every step, which only matters
/// for extremely skewed columns.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedCurve {
    pub mean: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub method: BandMethod,
}

/// Offset by the first value so identical entries average exactly.
fn mean(xs: &[f64]) -> f64 {
    let x0 = xs[0];
    x0 + xs.iter().map(|x| x - x0).sum::<f64>() / xs.len() as f64
}

/// Per-step mean and empirical 2.5th / 97.5th percentiles.
pub fn infection_bands(ensemble: &CurveEnsemble) -> Result<BandedCurve> {
    if ensemble.run_count() < 2 {
        return Err(Error::InsufficientData(format!("{} runs, need at least 2", ensemble.run_count())));
    }
    let steps = ensemble.steps();
    let mut out = BandedCurve {
        mean: Vec::with_capacity(steps),
        lo: Vec::with_capacity(steps),
        hi: Vec::with_capacity(steps),
        method: BandMethod::Percentile,
    };
    for t in 0..steps {
        let mut col = ensemble.column(t);
        let m = mean(&col);
        col.sort_by(f64::total_cmp);
        out.mean.push(m);
        out.lo.push(quantile_sorted(&col, 0.025).min(m));
        out.hi.push(quantile_sorted(&col, 0.975).max(m));
    }
    Ok(out)
}

/// Bootstrap band for the mean curve, resampling run indices.
pub fn bootstrap_bands(ensemble: &CurveEnsemble, resamples: usize, rng: &mut SimRng) -> Result<BandedCurve> {
    let n = ensemble.run_count();
    if n < 2 {
        return Err(Error::InsufficientData(format!("{n} runs, need at least 2")));
    }
    if resamples < 2 {
        return Err(invalid("need at least 2 bootstrap resamples"));
    }
    let steps = ensemble.steps();
    let mut means = vec![Vec::with_capacity(resamples); steps];
    let mut acc = vec![0.0; steps];
    for _ in 0..resamples {
        acc.iter_mut().for_each(|a| *a = 0.0);
        for _ in 0..n {
            let run = &ensemble.runs[rng.random_range(0..n)];
            for (a, v) in acc.iter_mut().zip(run) {
                *a += v;
            }
        }
        for (col, a) in means.iter_mut().zip(&acc) {
            col.push(a / n as f64);
        }
    }
    let mut out = BandedCurve { mean: Vec::new(), lo: Vec::new(), hi: Vec::new(), method: BandMethod::Bootstrap };
    for (t, col) in means.iter_mut().enumerate() {
        let m = mean(&ensemble.column(t));
        col.sort_by(f64::total_cmp);
        out.mean.push(m);
        out.lo.push(quantile_sorted(col, 0.025).min(m));
        out.hi.push(quantile_sorted(col, 0.975).max(m));
    }
    Ok(out)
}

/// Product-moment correlation.
pub fn pearson_correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(invalid(format!("length mismatch: {} vs {}", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::InsufficientData("correlation needs at least 2 points".into()));
    }
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::NoVariation);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Result of the k-sample Anderson–Darling test.
#[derive(Debug, Clone, PartialEq)]
pub struct AdTestResult {
    /// Standardized statistic `(A² − (k − 1)) / σ`.
    pub statistic: f64,
    /// Ties-adjusted A²_akN before standardization.
    pub a2: f64,
    pub p_value: f64,
    /// Critical values of the standardized statistic at [`AD_SIGNIFICANCE`].
    pub critical_values: [f64; 7],
}

pub const AD_SIGNIFICANCE: [f64; 7] = [0.25, 0.1, 0.05, 0.025, 0.01, 0.005, 0.001];
const AD_B0: [f64; 7] = [0.675, 1.281, 1.645, 1.96, 2.326, 2.573, 3.085];
const AD_B1: [f64; 7] = [-0.245, 0.25, 0.678, 1.149, 1.822, 2.364, 3.615];
const AD_B2: [f64; 7] = [-0.105, -0.305, -0.362, -0.391, -0.396, -0.345, -0.154];

/// Ties-adjusted A²_akN (midrank version).
fn ad_statistic(samples: &[&[f64]], pooled: &[f64]) -> f64 {
    let n_total = pooled.len() as f64;
    // Distinct pooled values with their multiplicities and the count strictly below.
    let mut distinct: Vec<(f64, f64, f64)> = Vec::new();
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i;
        while j < pooled.len() && pooled[j] == pooled[i] {
            j += 1;
        }
        distinct.push((pooled[i], (j - i) as f64, i as f64));
        i = j;
    }
    let mut a2 = 0.0;
    for s in samples {
        let mut sorted = s.to_vec();
        sorted.sort_by(f64::total_cmp);
        let ni = sorted.len() as f64;
        let mut inner = 0.0;
        let mut below = 0usize;
        for &(z, lj, less) in &distinct {
            while below < sorted.len() && sorted[below] < z {
                below += 1;
            }
            let mut equal = 0usize;
            while below + equal < sorted.len() && sorted[below + equal] == z {
                equal += 1;
            }
            let m_aij = below as f64 + equal as f64 / 2.0;
            let b_aj = less + lj / 2.0;
            let denom = b_aj * (n_total - b_aj) - n_total * lj / 4.0;
            if denom > 0.0 {
                inner += lj / n_total * (n_total * m_aij - ni * b_aj).powi(2) / denom;
            }
        }
        a2 += inner / ni;
    }
    a2 * (n_total - 1.0) / n_total
}

/// Variance of A²_kN under the null.
fn ad_variance(sizes: &[usize]) -> f64 {
    let k = sizes.len() as f64;
    let n = sizes.iter().sum::<usize>();
    let nf = n as f64;
    let hh: f64 = sizes.iter().map(|&s| 1.0 / s as f64).sum();
    let h: f64 = (1..n).map(|i| 1.0 / i as f64).sum();
    let mut g = 0.0;
    for i in 1..n.saturating_sub(1) {
        for j in i + 1..n {
            g += 1.0 / ((n - i) as f64 * j as f64);
        }
    }
    let a = (4.0 * g - 6.0) * (k - 1.0) + (10.0 - 6.0 * g) * hh;
    let b = (2.0 * g - 4.0) * k * k + 8.0 * h * k + (2.0 * g - 14.0 * h - 4.0) * hh - 8.0 * h + 4.0 * g - 6.0;
    let c = (6.0 * h + 2.0 * g - 2.0) * k * k + (4.0 * h - 4.0 * g + 6.0) * k + (2.0 * h - 6.0) * hh + 4.0 * h;
    let d = (2.0 * h + 6.0) * k * k - 4.0 * h * k;
    (a * nf.powi(3) + b * nf * nf + c * nf + d) / ((nf - 1.0) * (nf - 2.0) * (nf - 3.0))
}

/// Least-squares quadratic `y ≈ c0 + c1 x + c2 x²`.
fn fit_quadratic(x: &[f64], y: &[f64]) -> [f64; 3] {
    let mut m = [[0.0; 4]; 3];
    for (&xi, &yi) in x.iter().zip(y) {
        let p = [1.0, xi, xi * xi];
        for r in 0..3 {
            for c in 0..3 {
                m[r][c] += p[r] * p[c];
            }
            m[r][3] += p[r] * yi;
        }
    }
    // Gaussian elimination with partial pivoting.
    for col in 0..3 {
        let piv = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs())).unwrap();
        m.swap(col, piv);
        for r in 0..3 {
            if r != col {
                let f = m[r][col] / m[col][col];
                for c in col..4 {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    [m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]]
}

/// p-value from the tabulated critical points: log p is fitted as a
/// quadratic in the critical value and extrapolated linearly past the table.
fn ad_p_value(t: f64, crit: &[f64; 7]) -> f64 {
    let logp: Vec<f64> = AD_SIGNIFICANCE.iter().map(|s| s.ln()).collect();
    let c = fit_quadratic(crit, &logp);
    let f = |x: f64| c[0] + c[1] * x + c[2] * x * x;
    let df = |x: f64| c[1] + 2.0 * c[2] * x;
    let (lo, hi) = (crit[0], crit[6]);
    let lp = if t < lo {
        f(lo) + df(lo) * (t - lo)
    } else if t > hi {
        f(hi) + df(hi) * (t - hi)
    } else {
        f(t)
    };
    lp.exp().clamp(0.0, 1.0)
}

/// k-sample Anderson–Darling test that all samples share one distribution.
pub fn ad_k_sample(samples: &[&[f64]]) -> Result<AdTestResult> {
    let k = samples.len();
    if k < 2 {
        return Err(Error::InsufficientData(format!("{k} samples, need at least 2")));
    }
    if let Some(s) = samples.iter().find(|s| s.len() < 2) {
        return Err(Error::InsufficientData(format!("sample of size {}, need at least 2", s.len())));
    }
    if samples.iter().flat_map(|s| s.iter()).any(|v| !v.is_finite()) {
        return Err(invalid("samples must be finite"));
    }
    let mut pooled: Vec<f64> = samples.iter().flat_map(|s| s.iter().copied()).collect();
    pooled.sort_by(f64::total_cmp);
    if pooled.first() == pooled.last() {
        return Err(Error::NoVariation);
    }
    let sizes: Vec<usize> = samples.iter().map(|s| s.len()).collect();
    let a2 = ad_statistic(samples, &pooled);
    let m = (k - 1) as f64;
    let sigma = ad_variance(&sizes).sqrt();
    let statistic = (a2 - m) / sigma;
    let mut critical_values = [0.0; 7];
    for i in 0..7 {
        critical_values[i] = AD_B0[i] + AD_B1[i] / m.sqrt() + AD_B2[i] / m;
    }
    Ok(AdTestResult { statistic, a2, p_value: ad_p_value(statistic, &critical_values), critical_values })
}

/// Ensemble over fresh graphs: each run generates a graph, seeds it and runs the cascade.
///
/// Run `i` uses stream `i` of `seed` for graph generation and simulation.
pub fn kt_curves(
    spec: &GeneratorSpec,
    runs: usize,
    params: &KtParams,
    strategy: &SeedStrategy,
    seed: u64,
) -> Result<CurveEnsemble> {
    spec.validate()?;
    params.validate()?;
    let curves = (0..runs)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            let g = spec.generate(rng.next_u64())?;
            Ok(kt_simulate(&g, params, strategy, &mut rng)?.curve(params.steps + 1))
        })
        .collect::<Result<Vec<_>>>()?;
    CurveEnsemble::new(curves)
}

/// Repeated cascades on one fixed graph.
pub fn kt_curves_on_graph(
    g: &Graph,
    runs: usize,
    params: &KtParams,
    strategy: &SeedStrategy,
    seed: u64,
) -> Result<CurveEnsemble> {
    params.validate()?;
    let curves = (0..runs)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            Ok(kt_simulate(g, params, strategy, &mut rng)?.curve(params.steps + 1))
        })
        .collect::<Result<Vec<_>>>()?;
    CurveEnsemble::new(curves)
}

/// Planted-partition sweep relating diffusion speed to motif concentrations.
#[derive(Debug, Clone, PartialEq)]
pub struct MotifSpeedConfig {
    pub blocks: usize,
    pub block_size: usize,
    /// Within-block probability.
    pub pw: f64,
    /// Between-block probabilities, one graph per value per run.
    pub pb_grid: Vec<f64>,
    pub runs: usize,
    pub kt: KtParams,
    pub strategy: SeedStrategy,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotifSpeedRow {
    pub motif: MotifKind,
    /// `None` when fewer than two runs produced a defined correlation.
    pub mean_corr: Option<f64>,
    pub sd_corr: Option<f64>,
    pub valid_runs: usize,
}

/// Speed and concentrations measured on one graph.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSample {
    pub pb: f64,
    pub speed: f64,
    pub concentrations: Option<[f64; 6]>,
}

/// One graph per grid point: generate, cascade to steady state, census.
pub fn motif_speed_samples(cfg: &MotifSpeedConfig) -> Result<Vec<Vec<GridSample>>> {
    if cfg.pb_grid.len() < 2 {
        return Err(Error::InsufficientData("correlation across the grid needs at least 2 points".into()));
    }
    if cfg.runs < 2 {
        return Err(Error::InsufficientData("need at least 2 runs".into()));
    }
    cfg.kt.validate()?;
    let specs: Vec<GeneratorSpec> = cfg
        .pb_grid
        .iter()
        .map(|&pb| GeneratorSpec::planted_partition(cfg.blocks, cfg.block_size, cfg.pw, pb))
        .collect();
    for s in &specs {
        s.validate()?;
    }
    let points = cfg.pb_grid.len();
    let flat = (0..cfg.runs * points)
        .into_par_iter()
        .map(|job| {
            let mut rng = stream_rng(cfg.seed, job as u64);
            let g = specs[job % points].generate(rng.next_u64())?;
            let trace = kt_simulate(&g, &cfg.kt, &cfg.strategy, &mut rng)?;
            let c = census(&g);
            let concentrations = concentration(&c).ok().map(|m| {
                let mut a = [0.0; 6];
                for (k, v) in m {
                    a[k.index()] = v;
                }
                a
            });
            Ok(GridSample { pb: cfg.pb_grid[job % points], speed: diffusion_speed(&trace).nu, concentrations })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(flat.chunks(points).map(<[GridSample]>::to_vec).collect())
}

/// Per-run correlation of speed with each motif's concentration across the
/// grid, summarized by mean and sample standard deviation over runs.
pub fn motif_speed_experiment(cfg: &MotifSpeedConfig) -> Result<Vec<MotifSpeedRow>> {
    let samples = motif_speed_samples(cfg)?;
    summarize_motif_speed(&samples)
}

pub fn summarize_motif_speed(samples: &[Vec<GridSample>]) -> Result<Vec<MotifSpeedRow>> {
    let mut per_motif: Vec<Vec<f64>> = vec![Vec::new(); 6];
    for (r, run) in samples.iter().enumerate() {
        if run.iter().any(|s| s.concentrations.is_none()) {
            log::warn!("run {r}: a graph without motifs, run skipped");
            continue;
        }
        let speeds: Vec<f64> = run.iter().map(|s| s.speed).collect();
        for kind in MotifKind::ALL {
            let conc: Vec<f64> = run.iter().map(|s| s.concentrations.unwrap()[kind.index()]).collect();
            match pearson_correlation(&speeds, &conc) {
                Ok(c) => per_motif[kind.index()].push(c),
                Err(_) => log::debug!("run {r}: correlation undefined for {kind}, skipped"),
            }
        }
    }
    let rows: Vec<MotifSpeedRow> = MotifKind::ALL
        .iter()
        .map(|&motif| {
            let c = &per_motif[motif.index()];
            let (mean_corr, sd_corr) = if c.len() >= 2 {
                let m = mean(c);
                let var = c.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (c.len() as f64 - 1.0);
                (Some(m), Some(var.sqrt()))
            } else {
                (None, None)
            };
            MotifSpeedRow { motif, mean_corr, sd_corr, valid_runs: c.len() }
        })
        .collect();
    for r in rows.iter().filter(|r| r.valid_runs < samples.len()) {
        log::warn!("{}: correlation defined in {} of {} runs", r.motif, r.valid_runs, samples.len());
    }
    if rows.iter().all(|r| r.mean_corr.is_none()) {
        return Err(Error::InsufficientData("fewer than 2 valid runs for every motif".into()));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn bands_examples() {
        let same = CurveEnsemble::new(vec![vec![0.1, 0.5]; 5]).unwrap();
        let b = infection_bands(&same).unwrap();
        assert_eq!(b.lo, b.mean);
        assert_eq!(b.hi, b.mean);
        let two = CurveEnsemble::new(vec![vec![0.2], vec![0.4]]).unwrap();
        assert!((infection_bands(&two).unwrap().mean[0] - 0.3).abs() < 1e-15);
        assert!(infection_bands(&CurveEnsemble::new(vec![vec![0.2]]).unwrap()).is_err());
        assert!(CurveEnsemble::new(vec![vec![0.2], vec![0.4, 0.5]]).is_err());
        assert!(CurveEnsemble::new(vec![vec![1.2]]).is_err());
    }

    #[test]
    fn skewed_column_keeps_mean_inside_band() {
        let mut runs = vec![vec![1.0]; 999];
        runs.push(vec![0.0]);
        let b = infection_bands(&CurveEnsemble::new(runs).unwrap()).unwrap();
        assert!(b.lo[0] <= b.mean[0] && b.mean[0] <= b.hi[0]);
    }

    #[test]
    fn bootstrap_band_brackets_mean() {
        let mut rng = rng_from_seed(2);
        let runs: Vec<Vec<f64>> = (0..200).map(|_| vec![rng.random::<f64>(), 0.5]).collect();
        let e = CurveEnsemble::new(runs).unwrap();
        let b = bootstrap_bands(&e, 500, &mut rng).unwrap();
        assert_eq!(b.method, BandMethod::Bootstrap);
        assert!(b.lo[0] < b.mean[0] && b.mean[0] < b.hi[0]);
        assert!(b.hi[0] - b.lo[0] < 0.2);
        assert_eq!((b.lo[1], b.hi[1]), (0.5, 0.5));
    }

    #[test]
    fn pearson_examples() {
        let x = [1.0, 2.0, 3.0, 4.5];
        assert!((pearson_correlation(&x, &x).unwrap() - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson_correlation(&x, &neg).unwrap() + 1.0).abs() < 1e-15);
        // Hand computation: centered x = (-1, 0, 1), y = (2, 4, 6.1) - 4.0333..
        let r = pearson_correlation(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.1]).unwrap();
        let my = 12.1 / 3.0;
        let dy = [2.0 - my, 4.0 - my, 6.1 - my];
        let expected = (-dy[0] + dy[2]) / (2f64.sqrt() * (dy.iter().map(|d| d * d).sum::<f64>()).sqrt());
        assert!((r - expected).abs() < 1e-12);
        assert!(matches!(pearson_correlation(&[1.0, 1.0], &[1.0, 2.0]), Err(Error::NoVariation)));
        assert!(pearson_correlation(&[1.0], &[1.0]).is_err());
        assert!(pearson_correlation(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn ad_identical_samples_sit_at_the_bottom() {
        let s = [0.3, 1.2, 2.2, 3.9, 4.1, 5.0];
        let r = ad_k_sample(&[&s, &s, &s]).unwrap();
        assert!(r.statistic < r.critical_values[0]);
        assert!(r.p_value > 0.25);
        assert!(matches!(ad_k_sample(&[&[1.0, 1.0], &[1.0, 1.0]]), Err(Error::NoVariation)));
        assert!(ad_k_sample(&[&[1.0, 2.0]]).is_err());
        assert!(ad_k_sample(&[&[1.0, 2.0], &[1.0]]).is_err());
    }

    #[test]
    fn grid_of_one_point_is_rejected() {
        let cfg = MotifSpeedConfig {
            blocks: 2,
            block_size: 10,
            pw: 0.3,
            pb_grid: vec![0.01],
            runs: 3,
            kt: KtParams::default(),
            strategy: SeedStrategy::new(crate::kt::SeedKind::TopDegree, 0.01),
            seed: 1,
        };
        assert!(motif_speed_experiment(&cfg).is_err());
    }

    #[test]
    fn constant_concentration_runs_are_skipped() {
        let run = |speeds: [f64; 2], star: [f64; 2]| -> Vec<GridSample> {
            (0..2)
                .map(|i| {
                    let mut c = [0.0; 6];
                    c[MotifKind::Star4.index()] = star[i];
                    c[MotifKind::Path4.index()] = 1.0 - star[i];
                    GridSample { pb: i as f64, speed: speeds[i], concentrations: Some(c) }
                })
                .collect()
        };
        let rows = summarize_motif_speed(&[run([0.1, 0.2], [0.4, 0.6]), run([0.1, 0.3], [0.5, 0.7]), run([0.1, 0.2], [0.5, 0.5])])
            .unwrap();
        let star = &rows[MotifKind::Star4.index()];
        assert_eq!(star.valid_runs, 2);
        assert!((star.mean_corr.unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(rows[MotifKind::Clique4.index()].mean_corr, None);
    }
}
