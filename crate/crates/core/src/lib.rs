//! Diffusion and epidemic simulation on undirected networks.
//!
//! Graph construction and metrics, random-graph generators, the threshold
//! cascade, edge-disjoint 4-node motif censuses, a continuous-time SI model
//! with exact likelihood, Metropolis–Hastings inference and ensemble
//! statistics.

pub mod delaunay;
pub mod error;
pub mod generators;
pub mod graph;
pub mod io;
pub mod kt;
pub mod mcmc;
pub mod motif;
pub mod rng;
pub mod si;
pub mod stats;

pub use error::{Error, Result};
pub use generators::{GeneratorSpec, PointDistribution};
pub use graph::{EdgeId, Graph, GraphBuilder, NodeId, Point};
pub use kt::{DiffusionTrace, KtParams, SeedKind, SeedStrategy};
pub use mcmc::{Chain, ChainConfig, Prior, PriorSpec};
pub use motif::{MotifCensus, MotifKind};
pub use rng::SimRng;
pub use si::{CovariateSet, DistanceProvider, EventLog, SiParams};
pub use stats::{BandedCurve, CurveEnsemble};
