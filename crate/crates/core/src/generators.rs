//! Random graph ensembles: Erdős–Rényi, geometric, Delaunay and stochastic
//! block models. Every generator is a pure function of its parameters and a
//! 64-bit seed.

use std::collections::HashSet;
use std::hash::{DefaultHasher, Hash, Hasher};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::delaunay;
use crate::error::{invalid, Result};
use crate::graph::{Graph, GraphBuilder, Point};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PointDistribution {
    UniformSquare,
    #[default]
    StandardNormal,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorSpec {
    ErdosRenyi { n: usize, p: f64 },
    Geometric { n: usize, radius: f64 },
    Delaunay { n: usize, points: PointDistribution },
    StochasticBlock { block_sizes: Vec<usize>, probs: Vec<Vec<f64>> },
}

impl GeneratorSpec {
    /// Equal blocks with `pw` on the diagonal and `pb` elsewhere.
    pub fn planted_partition(blocks: usize, block_size: usize, pw: f64, pb: f64) -> Self {
        let probs = (0..blocks)
            .map(|a| (0..blocks).map(|b| if a == b { pw } else { pb }).collect())
            .collect();
        GeneratorSpec::StochasticBlock { block_sizes: vec![block_size; blocks], probs }
    }

    pub fn node_count(&self) -> usize {
        match self {
            GeneratorSpec::ErdosRenyi { n, .. }
            | GeneratorSpec::Geometric { n, .. }
            | GeneratorSpec::Delaunay { n, .. } => *n,
            GeneratorSpec::StochasticBlock { block_sizes, .. } => block_sizes.iter().sum(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            GeneratorSpec::ErdosRenyi { p, .. } => check_probability(*p, "p"),
            GeneratorSpec::Geometric { radius, .. } => {
                if radius.is_nan() || *radius < 0.0 {
                    return Err(invalid(format!("radius must be >= 0, got {radius}")));
                }
                Ok(())
            }
            GeneratorSpec::Delaunay { n, .. } => {
                if *n < 3 {
                    return Err(invalid(format!("Delaunay graph needs n >= 3, got {n}")));
                }
                Ok(())
            }
            GeneratorSpec::StochasticBlock { block_sizes, probs } => check_block_matrix(block_sizes, probs),
        }
    }

    pub fn generate(&self, seed: u64) -> Result<Graph> {
        match self {
            GeneratorSpec::ErdosRenyi { n, p } => erdos_renyi(*n, *p, seed),
            GeneratorSpec::Geometric { n, radius } => geometric_random(*n, *radius, seed),
            GeneratorSpec::Delaunay { n, points } => delaunay(*n, *points, seed),
            GeneratorSpec::StochasticBlock { block_sizes, probs } => stochastic_block_model(block_sizes, probs, seed),
        }
    }
}

fn check_probability(p: f64, name: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("{name} must lie in [0, 1], got {p}")));
    }
    Ok(())
}

fn check_block_matrix(block_sizes: &[usize], probs: &[Vec<f64>]) -> Result<()> {
    let k = block_sizes.len();
    if probs.len() != k || probs.iter().any(|row| row.len() != k) {
        return Err(invalid(format!("probability matrix must be {k}x{k} to match block sizes")));
    }
    for a in 0..k {
        for b in 0..k {
            check_probability(probs[a][b], "block probability")?;
            if probs[a][b] != probs[b][a] {
                return Err(invalid(format!("probability matrix not symmetric at ({a}, {b})")));
            }
        }
    }
    Ok(())
}

/// G(n, p): every pair included independently with probability `p`.
pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Graph> {
    check_probability(p, "p")?;
    let mut rng = rng_from_seed(seed);
    let mut b = GraphBuilder::with_nodes(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                b.add_edge(u, v, 1.0)?;
            }
        }
    }
    Ok(b.build())
}

fn sample_points(n: usize, dist: PointDistribution, rng: &mut impl Rng) -> Vec<Point> {
    (0..n)
        .map(|_| match dist {
            PointDistribution::UniformSquare => Point::new(rng.random(), rng.random()),
            PointDistribution::StandardNormal => {
                Point::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            }
        })
        .collect()
}

/// Random geometric graph on the unit square; edge iff distance <= `radius`.
pub fn geometric_random(n: usize, radius: f64, seed: u64) -> Result<Graph> {
    GeneratorSpec::Geometric { n, radius }.validate()?;
    let mut rng = rng_from_seed(seed);
    let pts = sample_points(n, PointDistribution::UniformSquare, &mut rng);
    let r2 = radius * radius;
    let mut b = GraphBuilder::with_nodes(n);
    for u in 0..n {
        for v in u + 1..n {
            let dx = pts[u].x - pts[v].x;
            let dy = pts[u].y - pts[v].y;
            if dx * dx + dy * dy <= r2 {
                b.add_edge(u, v, 1.0)?;
            }
        }
    }
    b.build().with_coords(pts)
}

fn jitter(index: usize, axis: u8) -> f64 {
    let mut h = DefaultHasher::new();
    (index, axis).hash(&mut h);
    // Map to [-1, 1).
    (h.finish() >> 11) as f64 / (1u64 << 52) as f64 - 1.0
}

/// Moves exact duplicates apart by a deterministic offset of order 1e-12.
fn separate_duplicates(pts: &mut [Point]) {
    let mut seen = HashSet::new();
    for (i, p) in pts.iter_mut().enumerate() {
        let mut round = 0u8;
        while !seen.insert((p.x.to_bits(), p.y.to_bits())) {
            p.x += 1e-12 * jitter(i, 2 * round);
            p.y += 1e-12 * jitter(i, 2 * round + 1);
            round = round.wrapping_add(1);
        }
    }
}

/// Delaunay triangulation of `n` random points, coordinates retained.
pub fn delaunay(n: usize, points: PointDistribution, seed: u64) -> Result<Graph> {
    GeneratorSpec::Delaunay { n, points }.validate()?;
    let mut rng = rng_from_seed(seed);
    let mut pts = sample_points(n, points, &mut rng);
    separate_duplicates(&mut pts);
    delaunay_graph(pts)
}

/// Delaunay graph of the given points.
pub fn delaunay_graph(points: Vec<Point>) -> Result<Graph> {
    let tri = delaunay::triangulate(&points)?;
    let mut b = GraphBuilder::with_nodes(points.len());
    for (u, v) in tri.edges() {
        b.add_edge(u, v, 1.0)?;
    }
    b.build().with_coords(points)
}

/// Stochastic block model; node ids are assigned block by block.
pub fn stochastic_block_model(block_sizes: &[usize], probs: &[Vec<f64>], seed: u64) -> Result<Graph> {
    check_block_matrix(block_sizes, probs)?;
    let blocks: Vec<usize> = block_sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &size)| std::iter::repeat_n(b, size))
        .collect();
    let n = blocks.len();
    let mut rng = rng_from_seed(seed);
    let mut b = GraphBuilder::with_nodes(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < probs[blocks[u]][blocks[v]] {
                b.add_edge(u, v, 1.0)?;
            }
        }
    }
    b.build().with_blocks(blocks)
}
