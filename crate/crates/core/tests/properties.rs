mod common;

use common::*;
use netdiff_core::generators::{delaunay_graph, geometric_random};
use netdiff_core::graph::{betweenness_centrality, giant_component, path_lengths, Graph, Point};
use netdiff_core::kt::{kt_run, KtParams};
use netdiff_core::motif::{brute_force_census, census, CandidateOrder};
use netdiff_core::rng::rng_from_seed;
use netdiff_core::si::{log_likelihood, rate, CovariateSet, DistanceProvider, EventLog, SiParams};
use netdiff_core::stats::{ad_k_sample, pearson_correlation};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn handshake(g in arb_graph(12)) {
        prop_assert_eq!(g.degrees().iter().sum::<usize>(), 2 * g.edge_count());
    }

    #[test]
    fn path_lengths_are_symmetric_and_match_floyd(g in arb_graph(10)) {
        let p = path_lengths(&g);
        let d = floyd(&g);
        for i in 0..g.node_count() {
            prop_assert_eq!(p.get(i, i), Some(0));
            for j in 0..g.node_count() {
                prop_assert_eq!(p.get(i, j), p.get(j, i));
                prop_assert_eq!(p.get(i, j).map(|x| x as usize), d[i][j]);
            }
        }
    }

    #[test]
    fn betweenness_matches_path_enumeration(g in arb_graph(8)) {
        let fast = betweenness_centrality(&g).values;
        let slow = brute_betweenness(&g);
        for (a, b) in fast.iter().zip(&slow) {
            prop_assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn giant_component_is_idempotent(g in arb_graph(12)) {
        let once = giant_component(&g).unwrap();
        prop_assert!(once.is_connected());
        prop_assert_eq!(giant_component(&once).unwrap(), once.clone());
        let largest = g.components().iter().map(Vec::len).max().unwrap();
        prop_assert_eq!(once.node_count(), largest);
    }

    #[test]
    fn delaunay_euler_relation_and_empty_circles(
        raw in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3..40)
    ) {
        let pts: Vec<Point> = raw.iter().map(|&(x, y)| Point::new(x, y)).collect();
        let mut uniq = pts.clone();
        uniq.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        uniq.dedup();
        prop_assume!(uniq.len() == pts.len());
        let tri = match netdiff_core::delaunay::triangulate(&pts) {
            Ok(t) => t,
            Err(_) => {
                // Only an all-collinear input may be rejected.
                prop_assert_eq!(hull_point_count(&pts), pts.len());
                return Ok(());
            }
        };
        let g = delaunay_graph(pts.clone()).unwrap();
        let n = pts.len();
        let h = hull_point_count(&pts);
        prop_assert_eq!(g.edge_count(), 3 * n - 3 - h);
        prop_assert!(g.is_connected());
        for t in &tri.triangles {
            for (k, &p) in pts.iter().enumerate() {
                if !t.contains(&k) {
                    prop_assert!(!strictly_in_circumcircle(pts[t[0]], pts[t[1]], pts[t[2]], p));
                }
            }
        }
    }

    #[test]
    fn geometric_edges_match_coordinates(n in 0usize..60, r in 0.0f64..0.5, seed in any::<u64>()) {
        let g = geometric_random(n, r, seed).unwrap();
        let c = g.coords().unwrap();
        for u in 0..n {
            for v in u + 1..n {
                let d2 = (c[u].x - c[v].x).powi(2) + (c[u].y - c[v].y).powi(2);
                prop_assert_eq!(g.has_edge(u, v), d2 <= r * r);
            }
        }
    }

    #[test]
    fn census_equals_brute_force(g in arb_graph(10)) {
        let c = census(&g);
        prop_assert!(c.check_edge_disjoint(&g));
        let b = brute_force_census(&g, CandidateOrder::Traversal).unwrap();
        prop_assert_eq!(c.counts(), b.counts());
        prop_assert_eq!(&c.used_edges, &b.used_edges);
    }

    #[test]
    fn kt_cascade_is_monotone_and_coupled_in_tau(
        g in arb_graph(12),
        tau in 0.0f64..1.0,
        dt in 0.0f64..0.5,
        delta in 0.0f64..0.2,
        seed in any::<u64>(),
    ) {
        let n = g.node_count();
        let params = KtParams { eta0: 0.1, steps: 15, delta, beta: 0.0, tau, steady_fraction: 0.95 };
        let low = KtParams { tau: (tau - dt).max(0.0), ..params };
        let seeds = [0];
        let blocked: Vec<usize> = if n > 2 { vec![n - 1] } else { vec![] };
        let hi = kt_run(&g, &params, &seeds, &blocked, &mut rng_from_seed(seed)).unwrap();
        let lo = kt_run(&g, &low, &seeds, &blocked, &mut rng_from_seed(seed)).unwrap();
        for t in 1..=hi.last_step() {
            let prev = hi.adopted_set(t - 1);
            let cur = hi.adopted_set(t);
            prop_assert!(prev.iter().all(|v| cur.contains(v)));
            prop_assert!(cur.iter().all(|v| !blocked.contains(v)));
            prop_assert_eq!(hi.eta[t], cur.len() as f64 / n as f64);
        }
        for t in 0..=params.steps {
            let big = lo.adopted_set(t.min(lo.last_step()));
            prop_assert!(hi.adopted_set(t.min(hi.last_step())).iter().all(|v| big.contains(v)));
        }
    }

    #[test]
    fn si_scaling_identity(
        g in arb_graph(8),
        c in 0.1f64..10.0,
        alpha in 0.01f64..2.0,
        theta in 0.0f64..2.0,
        phi in proptest::collection::vec(0.0f64..2.0, 3),
        seed in any::<u64>(),
    ) {
        prop_assume!(g.edge_count() > 0);
        let n = g.node_count();
        let mut cov = CovariateSet::centralities(&g);
        cov = cov.with_edge_covariate((0..g.edge_count()).map(|e| (e as f64 + 1.0) / 10.0).collect());
        let dist = DistanceProvider::hops(&g);
        let base = SiParams { zeta: 0.01, alpha, gamma: 1.3, theta: vec![theta], phi: phi.clone(), omega: vec![1.0] };
        let scaled = SiParams {
            alpha: alpha / c,
            theta: vec![theta / c],
            phi: phi.iter().map(|p| p * c).collect(),
            ..base.clone()
        };
        let log = netdiff_core::si::simulate_si(
            &g, &base, &cov, &dist, &[0],
            netdiff_core::si::SimulationLimits::horizon(5.0), &mut rng_from_seed(seed),
        ).unwrap().log;
        let a = log_likelihood(&base, &log, &g, &cov, &dist).unwrap();
        let b = log_likelihood(&scaled, &log, &g, &cov, &dist).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0), "{a} vs {b}");
        let mut inf = vec![false; n];
        inf[0] = true;
        for i in 1..n {
            let ra = rate(&g, i, &inf, &base, &cov, &dist).unwrap();
            let rb = rate(&g, i, &inf, &scaled, &cov, &dist).unwrap();
            prop_assert!((ra - rb).abs() <= 1e-12 * ra.max(1.0));
        }
    }

    #[test]
    fn si_rate_is_additive_over_infectious_nodes(
        g in arb_graph(8),
        set in proptest::collection::vec(any::<bool>(), 8),
        extra in 0usize..8,
    ) {
        let n = g.node_count();
        let cov = CovariateSet::centralities(&g);
        let dist = DistanceProvider::hops(&g);
        let p = SiParams { zeta: 0.002, alpha: 0.7, gamma: 2.0, theta: vec![], phi: vec![1.0, 0.5, 0.25], omega: vec![1.0] };
        let j = extra % n;
        let mut inf: Vec<bool> = set[..n].to_vec();
        inf[j] = false;
        for i in 0..n {
            if inf[i] || i == j {
                continue;
            }
            let before = rate(&g, i, &inf, &p, &cov, &dist).unwrap();
            let mut with = inf.clone();
            with[j] = true;
            let after = rate(&g, i, &with, &p, &cov, &dist).unwrap();
            let k = netdiff_core::si::kernel(&g, i, j, &dist, &cov, p.alpha, p.gamma, &p.theta).unwrap();
            let psi_t = netdiff_core::si::transmissibility(j, &cov, &p.phi).unwrap();
            prop_assert!((after - before - psi_t * k).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_log_is_pure_survival(g in arb_graph(8), horizon in 0.0f64..20.0) {
        let n = g.node_count();
        let cov = CovariateSet::centralities(&g);
        let dist = DistanceProvider::hops(&g);
        let p = SiParams { zeta: 0.01, alpha: 0.3, gamma: 1.0, theta: vec![], phi: vec![1.0, 1.0, 1.0], omega: vec![1.0] };
        let log = EventLog { initial: vec![0], events: vec![], horizon };
        let mut inf = vec![false; n];
        inf[0] = true;
        let total: f64 = (1..n).map(|i| rate(&g, i, &inf, &p, &cov, &dist).unwrap()).sum();
        let ll = log_likelihood(&p, &log, &g, &cov, &dist).unwrap();
        prop_assert!((ll + total * horizon).abs() < 1e-10 * (1.0 + total * horizon));
    }

    #[test]
    fn pearson_is_affine_invariant(
        pts in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..30),
        a in 0.1f64..5.0, b in -5.0f64..5.0, c in 0.1f64..5.0, d in -5.0f64..5.0,
    ) {
        let x: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let Ok(r) = pearson_correlation(&x, &y) else { return Ok(()) };
        let x2: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let y2: Vec<f64> = y.iter().map(|v| c * v + d).collect();
        let r2 = pearson_correlation(&x2, &y2).unwrap();
        prop_assert!((r - r2).abs() < 1e-12, "{r} vs {r2}");
        prop_assert!((-1.0..=1.0).contains(&r));
    }

    #[test]
    fn ad_is_permutation_invariant(
        samples in proptest::collection::vec(proptest::collection::vec(0u8..6, 2..12), 2..5),
        rot in 0usize..5,
    ) {
        let s: Vec<Vec<f64>> = samples.iter().map(|v| v.iter().map(|&x| x as f64).collect()).collect();
        let refs: Vec<&[f64]> = s.iter().map(Vec::as_slice).collect();
        let Ok(base) = ad_k_sample(&refs) else { return Ok(()) };
        let mut shuffled: Vec<Vec<f64>> = s.iter().map(|v| { let mut v = v.clone(); v.reverse(); v }).collect();
        shuffled.rotate_left(rot % s.len());
        let refs2: Vec<&[f64]> = shuffled.iter().map(Vec::as_slice).collect();
        let other = ad_k_sample(&refs2).unwrap();
        prop_assert!((base.statistic - other.statistic).abs() < 1e-9 * base.statistic.abs().max(1.0));
        prop_assert!((base.p_value - other.p_value).abs() < 1e-9);
    }
}

#[test]
fn fully_infected_log_has_zero_likelihood_cost() {
    let g = Graph::empty(1);
    let cov = CovariateSet::centralities(&g);
    let log = EventLog { initial: vec![0], events: vec![], horizon: 3.0 };
    let p = SiParams { zeta: 0.1, alpha: 1.0, gamma: 1.0, theta: vec![], phi: vec![1.0; 3], omega: vec![1.0] };
    assert_eq!(log_likelihood(&p, &log, &g, &cov, &DistanceProvider::hops(&g)).unwrap(), 0.0);
}
