//! Incremental Bowyer–Watson Delaunay triangulation.
//!
//! The unbounded face is modelled with ghost triangles: every convex hull
//! edge `(a, b)` carries a triangle `(a, b, GHOST)` whose "circumcircle" is
//! the open half-plane to the left of `a -> b` plus the open segment `ab`.
//! This plays the role of the usual enclosing super-triangle with its
//! vertices pushed to infinity, so no hull edge is lost when it is removed.
//! Orientation and in-circle tests use exact adaptive predicates.

use std::collections::HashMap;

use robust::{incircle, orient2d, Coord};

use crate::error::{Error, Result};
use crate::graph::Point;

const GHOST: usize = usize::MAX;

#[derive(Debug, Clone)]
pub struct Triangulation {
    /// Finite triangles, counter-clockwise.
    pub triangles: Vec<[usize; 3]>,
    /// Convex hull edges `(a, b)` with the triangulation to the right of `a -> b`.
    pub hull_edges: Vec<(usize, usize)>,
}

impl Triangulation {
    /// Undirected edges as sorted `(min, max)` pairs, deduplicated.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self
            .triangles
            .iter()
            .flat_map(|t| [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])])
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn hull_size(&self) -> usize {
        self.hull_edges.len()
    }
}

fn coord(p: Point) -> Coord<f64> {
    Coord { x: p.x, y: p.y }
}

fn orient(pts: &[Point], a: usize, b: usize, c: usize) -> f64 {
    orient2d(coord(pts[a]), coord(pts[b]), coord(pts[c]))
}

/// `p` strictly inside the closed segment's interior, given collinearity.
fn strictly_between(pts: &[Point], a: usize, b: usize, p: usize) -> bool {
    let (a, b, p) = (pts[a], pts[b], pts[p]);
    let dot = (p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y);
    let len2 = (b.x - a.x).powi(2) + (b.y - a.y).powi(2);
    dot > 0.0 && dot < len2
}

fn in_conflict(pts: &[Point], tri: &[usize; 3], p: usize) -> bool {
    if tri[2] == GHOST {
        let o = orient(pts, tri[0], tri[1], p);
        o > 0.0 || (o == 0.0 && strictly_between(pts, tri[0], tri[1], p))
    } else {
        incircle(coord(pts[tri[0]]), coord(pts[tri[1]]), coord(pts[tri[2]]), coord(pts[p])) > 0.0
    }
}

/// Ghost vertex rotated into the last slot, preserving cyclic order.
fn canonical(t: [usize; 3]) -> [usize; 3] {
    if t[0] == GHOST {
        [t[1], t[2], t[0]]
    } else if t[1] == GHOST {
        [t[2], t[0], t[1]]
    } else {
        t
    }
}

/// Triangulates `points`; exact duplicates must be removed or perturbed first.
pub fn triangulate(points: &[Point]) -> Result<Triangulation> {
    let n = points.len();
    if n < 3 {
        return Err(Error::InvalidParameter(format!("triangulation needs at least 3 points, got {n}")));
    }
    // Insertion order: a non-degenerate initial triangle, then the rest in index order.
    let third = (2..n)
        .find(|&k| orient(points, 0, 1, k) != 0.0)
        .ok_or_else(|| Error::InvalidParameter("all points are collinear".into()))?;
    let (a, b, c) = if orient(points, 0, 1, third) > 0.0 { (0, 1, third) } else { (1, 0, third) };

    let mut tris: Vec<[usize; 3]> = vec![[a, b, c], [b, a, GHOST], [c, b, GHOST], [a, c, GHOST]];
    let mut alive: Vec<bool> = vec![true; 4];
    // Directed edge -> triangle holding it in counter-clockwise order.
    let mut edge_owner: HashMap<(usize, usize), usize> = HashMap::new();
    for (i, t) in tris.iter().enumerate() {
        for k in 0..3 {
            edge_owner.insert((t[k], t[(k + 1) % 3]), i);
        }
    }

    let mut cavity = Vec::new();
    let mut stack = Vec::new();
    let mut in_cavity: HashMap<usize, bool> = HashMap::new();
    for p in (0..n).filter(|&k| k != a && k != b && k != c) {
        // Point location by scan; the cavity is then grown across shared edges.
        let start = (0..tris.len())
            .find(|&i| alive[i] && in_conflict(points, &tris[i], p))
            .ok_or_else(|| Error::InvalidParameter(format!("point {p} duplicates an existing vertex")))?;
        cavity.clear();
        stack.clear();
        in_cavity.clear();
        stack.push(start);
        in_cavity.insert(start, true);
        while let Some(t) = stack.pop() {
            cavity.push(t);
            let tri = tris[t];
            for k in 0..3 {
                let (u, v) = (tri[k], tri[(k + 1) % 3]);
                if let Some(&nb) = edge_owner.get(&(v, u)) {
                    if let std::collections::hash_map::Entry::Vacant(e) = in_cavity.entry(nb) {
                        let hit = in_conflict(points, &tris[nb], p);
                        e.insert(hit);
                        if hit {
                            stack.push(nb);
                        }
                    }
                }
            }
        }
        // Boundary edges of the cavity, oriented as in their removed triangle.
        let mut boundary = Vec::new();
        for &t in &cavity {
            let tri = tris[t];
            for k in 0..3 {
                let (u, v) = (tri[k], tri[(k + 1) % 3]);
                let across = edge_owner.get(&(v, u)).copied();
                let inside = across.map(|nb| in_cavity.get(&nb) == Some(&true)).unwrap_or(false);
                if !inside {
                    boundary.push((u, v));
                }
            }
        }
        for &t in &cavity {
            alive[t] = false;
            let tri = tris[t];
            for k in 0..3 {
                let key = (tri[k], tri[(k + 1) % 3]);
                if edge_owner.get(&key) == Some(&t) {
                    edge_owner.remove(&key);
                }
            }
        }
        for (u, v) in boundary {
            // An edge between two ghost-adjacent vertices and p never both be ghost.
            let t = canonical([u, v, p]);
            let id = tris.len();
            tris.push(t);
            alive.push(true);
            for k in 0..3 {
                edge_owner.insert((t[k], t[(k + 1) % 3]), id);
            }
        }
    }

    let mut triangles = Vec::new();
    let mut hull_edges = Vec::new();
    for (t, &live) in tris.iter().zip(&alive) {
        if !live {
            continue;
        }
        if t[2] == GHOST {
            hull_edges.push((t[0], t[1]));
        } else {
            triangles.push(*t);
        }
    }
    Ok(Triangulation { triangles, hull_edges })
}
