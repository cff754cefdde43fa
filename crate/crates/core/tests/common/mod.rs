#![allow(dead_code)]

use netdiff_core::graph::{Graph, Point};
use proptest::prelude::*;

/// Graph on `n` nodes with each pair present according to `mask`.
pub fn graph_from_mask(n: usize, mask: &[bool]) -> Graph {
    let mut edges = Vec::new();
    let mut k = 0;
    for u in 0..n {
        for v in u + 1..n {
            if mask[k] {
                edges.push((u, v));
            }
            k += 1;
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

pub fn arb_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n).prop_flat_map(|n| {
        let pairs = n * (n - 1) / 2;
        (Just(n), proptest::collection::vec(proptest::bool::weighted(0.4), pairs))
            .prop_map(|(n, mask)| graph_from_mask(n, &mask))
    })
}

/// All-pairs hop distances by Floyd–Warshall.
pub fn floyd(g: &Graph) -> Vec<Vec<Option<usize>>> {
    let n = g.node_count();
    let mut d = vec![vec![None; n]; n];
    for u in 0..n {
        d[u][u] = Some(0);
        for &v in g.neighbors(u) {
            d[u][v] = Some(1);
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(a), Some(b)) = (d[i][k], d[k][j]) {
                    if d[i][j].is_none_or(|c| a + b < c) {
                        d[i][j] = Some(a + b);
                    }
                }
            }
        }
    }
    d
}

/// Shortest paths from `s` to `t` enumerated explicitly by depth-first search.
pub fn all_shortest_paths(g: &Graph, s: usize, t: usize, dist: usize) -> Vec<Vec<usize>> {
    fn walk(g: &Graph, path: &mut Vec<usize>, t: usize, left: usize, out: &mut Vec<Vec<usize>>) {
        let u = *path.last().unwrap();
        if left == 0 {
            if u == t {
                out.push(path.clone());
            }
            return;
        }
        for &v in g.neighbors(u) {
            if !path.contains(&v) {
                path.push(v);
                walk(g, path, t, left - 1, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(g, &mut vec![s], t, dist, &mut out);
    out
}

/// Betweenness from explicit path enumeration; unordered pairs.
pub fn brute_betweenness(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    let d = floyd(g);
    let mut b = vec![0.0; n];
    for s in 0..n {
        for t in s + 1..n {
            let Some(dist) = d[s][t] else { continue };
            let paths = all_shortest_paths(g, s, t, dist);
            let total = paths.len() as f64;
            for p in &paths {
                for &v in &p[1..p.len() - 1] {
                    b[v] += 1.0 / total;
                }
            }
        }
    }
    b
}

/// Number of points on the convex hull boundary, collinear boundary points included.
pub fn hull_point_count(pts: &[Point]) -> usize {
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by(|&a, &b| pts[a].x.total_cmp(&pts[b].x).then(pts[a].y.total_cmp(&pts[b].y)));
    let cross = |o: usize, a: usize, b: usize| {
        (pts[a].x - pts[o].x) * (pts[b].y - pts[o].y) - (pts[a].y - pts[o].y) * (pts[b].x - pts[o].x)
    };
    let mut lower: Vec<usize> = Vec::new();
    for &p in &idx {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) < 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &p in idx.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) < 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    let mut hull: Vec<usize> = lower.into_iter().chain(upper).collect();
    hull.sort_unstable();
    hull.dedup();
    hull.len()
}

/// `p` strictly inside the circumcircle of counter-clockwise `(a, b, c)`, with a relative tolerance.
pub fn strictly_in_circumcircle(a: Point, b: Point, c: Point, p: Point) -> bool {
    let (ax, ay) = (a.x - p.x, a.y - p.y);
    let (bx, by) = (b.x - p.x, b.y - p.y);
    let (cx, cy) = (c.x - p.x, c.y - p.y);
    let det = (ax * ax + ay * ay) * (bx * cy - cx * by) - (bx * bx + by * by) * (ax * cy - cx * ay)
        + (cx * cx + cy * cy) * (ax * by - bx * ay);
    let scale = (ax * ax + ay * ay + bx * bx + by * by + cx * cx + cy * cy).powi(2);
    det > 1e-9 * scale
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() as f64 - 1.0)
}
