//! Undirected weighted graphs and the structural metrics built on them.
//!
//! Nodes are dense indices `0..n` assigned in first-seen order at
//! construction; external labels live in a side table. A [`Graph`] is
//! immutable once built, so every metric here is a read-only pass that can
//! run concurrently from many threads.

use std::collections::{BTreeMap, HashMap, VecDeque};

use crate::error::{Error, Result};

pub type NodeId = usize;
pub type EdgeId = usize;

/// Planar coordinates attached to a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    labels: Vec<String>,
    // Sorted neighbor lists with the matching edge ids alongside.
    adj: Vec<Vec<NodeId>>,
    adj_edges: Vec<Vec<EdgeId>>,
    // Canonical (min, max) endpoints sorted lexicographically; index is the edge id.
    edges: Vec<(NodeId, NodeId)>,
    weights: Vec<f64>,
    coords: Option<Vec<Point>>,
    blocks: Option<Vec<usize>>,
}

/// Accumulates edges before freezing them into a [`Graph`].
///
/// Duplicate edges collapse, keeping the last weight seen.
#[derive(Debug, Clone, Default)]
pub struct GraphBuilder {
    labels: Vec<String>,
    index: HashMap<String, NodeId>,
    edges: BTreeMap<(NodeId, NodeId), f64>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builder with `n` nodes labelled `"0".."n-1"`.
    pub fn with_nodes(n: usize) -> Self {
        let mut b = Self::new();
        for i in 0..n {
            b.node(&i.to_string());
        }
        b
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    /// Returns the index for `label`, allocating the next dense id if unseen.
    pub fn node(&mut self, label: &str) -> NodeId {
        if let Some(&id) = self.index.get(label) {
            return id;
        }
        let id = self.labels.len();
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), id);
        id
    }

    pub fn add_edge(&mut self, u: NodeId, v: NodeId, weight: f64) -> Result<()> {
        let n = self.labels.len();
        if u >= n {
            return Err(Error::NodeOutOfRange(u));
        }
        if v >= n {
            return Err(Error::NodeOutOfRange(v));
        }
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        if !(weight >= 0.0) || !weight.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "edge weight must be finite and non-negative, got {weight}"
            )));
        }
        self.edges.insert((u.min(v), u.max(v)), weight);
        Ok(())
    }

    pub fn add_labeled_edge(&mut self, a: &str, b: &str, weight: f64) -> Result<()> {
        let u = self.node(a);
        let v = self.node(b);
        self.add_edge(u, v, weight)
    }

    pub fn build(self) -> Graph {
        let n = self.labels.len();
        let mut adj = vec![Vec::new(); n];
        let mut adj_edges = vec![Vec::new(); n];
        let mut edges = Vec::with_capacity(self.edges.len());
        let mut weights = Vec::with_capacity(self.edges.len());
        for (id, (&(u, v), &w)) in self.edges.iter().enumerate() {
            edges.push((u, v));
            weights.push(w);
            adj[u].push((v, id));
            adj[v].push((u, id));
        }
        let mut adj_nodes = Vec::with_capacity(n);
        for (list, ids) in adj.into_iter().zip(adj_edges.iter_mut()) {
            let mut list: Vec<(NodeId, EdgeId)> = list;
            list.sort_unstable();
            ids.extend(list.iter().map(|&(_, e)| e));
            adj_nodes.push(list.into_iter().map(|(v, _)| v).collect());
        }
        Graph {
            labels: self.labels,
            adj: adj_nodes,
            adj_edges,
            edges,
            weights,
            coords: None,
            blocks: None,
        }
    }
}

impl Graph {
    /// Unweighted graph on `n` nodes from index pairs.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (NodeId, NodeId)>) -> Result<Self> {
        let mut b = GraphBuilder::with_nodes(n);
        for (u, v) in edges {
            b.add_edge(u, v, 1.0)?;
        }
        Ok(b.build())
    }

    pub fn empty(n: usize) -> Self {
        GraphBuilder::with_nodes(n).build()
    }

    pub fn complete(n: usize) -> Self {
        let mut b = GraphBuilder::with_nodes(n);
        for u in 0..n {
            for v in u + 1..n {
                b.add_edge(u, v, 1.0).expect("valid indices");
            }
        }
        b.build()
    }

    pub fn path(n: usize) -> Self {
        Self::from_edges(n, (1..n).map(|i| (i - 1, i))).expect("valid indices")
    }

    pub fn cycle(n: usize) -> Self {
        Self::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).expect("valid indices")
    }

    /// Star with node 0 at the center and `n - 1` leaves.
    pub fn star(n: usize) -> Self {
        Self::from_edges(n, (1..n).map(|i| (0, i))).expect("valid indices")
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.adj[u]
    }

    /// Edge ids parallel to [`Graph::neighbors`].
    pub fn incident_edges(&self, u: NodeId) -> &[EdgeId] {
        &self.adj_edges[u]
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.adj[u].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    pub fn edge_id(&self, u: NodeId, v: NodeId) -> Option<EdgeId> {
        let (a, b) = if self.adj[u].len() <= self.adj[v].len() { (u, v) } else { (v, u) };
        self.adj[a].binary_search(&b).ok().map(|pos| self.adj_edges[a][pos])
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        u != v && self.edge_id(u, v).is_some()
    }

    /// Canonical `(min, max)` endpoints in edge-id order.
    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> (NodeId, NodeId) {
        self.edges[id]
    }

    pub fn edge_weight(&self, id: EdgeId) -> f64 {
        self.weights[id]
    }

    pub fn weight(&self, u: NodeId, v: NodeId) -> Option<f64> {
        self.edge_id(u, v).map(|e| self.weights[e])
    }

    pub fn label(&self, u: NodeId) -> &str {
        &self.labels[u]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label_index(&self) -> HashMap<&str, NodeId> {
        self.labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect()
    }

    pub fn coords(&self) -> Option<&[Point]> {
        self.coords.as_deref()
    }

    pub fn with_coords(mut self, coords: Vec<Point>) -> Result<Self> {
        if coords.len() != self.node_count() {
            return Err(Error::InvalidParameter(format!(
                "expected {} coordinates, got {}",
                self.node_count(),
                coords.len()
            )));
        }
        self.coords = Some(coords);
        Ok(self)
    }

    pub fn blocks(&self) -> Option<&[usize]> {
        self.blocks.as_deref()
    }

    pub fn with_blocks(mut self, blocks: Vec<usize>) -> Result<Self> {
        if blocks.len() != self.node_count() {
            return Err(Error::InvalidParameter(format!(
                "expected {} block labels, got {}",
                self.node_count(),
                blocks.len()
            )));
        }
        self.blocks = Some(blocks);
        Ok(self)
    }

    /// Hop distances from `source`; `None` marks unreachable nodes.
    pub fn bfs(&self, source: NodeId) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.node_count()];
        let mut queue = VecDeque::new();
        dist[source] = Some(0);
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap() + 1;
            for &v in &self.adj[u] {
                if dist[v].is_none() {
                    dist[v] = Some(d);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<NodeId>> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut i = 0;
            while i < comp.len() {
                let u = comp[i];
                i += 1;
                for &v in &self.adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.node_count() > 0 && self.components().len() == 1
    }

    /// Subgraph induced by `nodes`, renumbered in the given order with
    /// labels, weights, coordinates and blocks carried over.
    pub fn induced_subgraph(&self, nodes: &[NodeId]) -> Graph {
        let mut remap = vec![usize::MAX; self.node_count()];
        for (new, &old) in nodes.iter().enumerate() {
            remap[old] = new;
        }
        let mut b = GraphBuilder::new();
        for &old in nodes {
            b.node(&self.labels[old]);
        }
        for (id, &(u, v)) in self.edges.iter().enumerate() {
            if remap[u] != usize::MAX && remap[v] != usize::MAX {
                b.add_edge(remap[u], remap[v], self.weights[id]).expect("valid remap");
            }
        }
        let mut g = b.build();
        g.coords = self.coords.as_ref().map(|c| nodes.iter().map(|&i| c[i]).collect());
        g.blocks = self.blocks.as_ref().map(|c| nodes.iter().map(|&i| c[i]).collect());
        g
    }
}

/// Which structural measure a [`CentralityVector`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CentralityKind {
    Degree,
    Betweenness,
    Clustering,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CentralityVector {
    pub kind: CentralityKind,
    pub values: Vec<f64>,
    pub normalized: bool,
}

impl CentralityVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Divides every value by the vector maximum; an all-zero vector stays zero.
    pub fn normalize_by_max(&self) -> CentralityVector {
        let max = self.max();
        let values = if max > 0.0 {
            self.values.iter().map(|v| v / max).collect()
        } else {
            vec![0.0; self.values.len()]
        };
        CentralityVector { kind: self.kind, values, normalized: true }
    }
}

pub fn normalize_by_max(c: &CentralityVector) -> CentralityVector {
    c.normalize_by_max()
}

/// Fraction of nodes having each degree.
pub fn degree_distribution(g: &Graph) -> Result<BTreeMap<usize, f64>> {
    if g.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let mut counts = BTreeMap::new();
    for u in 0..g.node_count() {
        *counts.entry(g.degree(u)).or_insert(0usize) += 1;
    }
    let n = g.node_count() as f64;
    Ok(counts.into_iter().map(|(k, c)| (k, c as f64 / n)).collect())
}

/// All-pairs hop counts.
#[derive(Debug, Clone, PartialEq)]
pub struct PathLengths {
    n: usize,
    dist: Vec<u32>,
}

impl PathLengths {
    pub const UNREACHABLE: u32 = u32::MAX;

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn raw(&self, i: NodeId, j: NodeId) -> u32 {
        self.dist[i * self.n + j]
    }

    /// `None` for disconnected pairs.
    pub fn get(&self, i: NodeId, j: NodeId) -> Option<u32> {
        match self.raw(i, j) {
            Self::UNREACHABLE => None,
            d => Some(d),
        }
    }

    pub fn is_connected(&self) -> bool {
        !self.dist.contains(&Self::UNREACHABLE)
    }

    pub fn average(&self) -> Result<f64> {
        if self.n == 0 {
            return Err(Error::EmptyGraph);
        }
        if !self.is_connected() {
            return Err(Error::Disconnected);
        }
        if self.n == 1 {
            return Ok(0.0);
        }
        let total: u64 = self.dist.iter().map(|&d| d as u64).sum();
        Ok(total as f64 / (self.n as f64 * (self.n as f64 - 1.0)))
    }

    pub fn diameter(&self) -> Result<u32> {
        if self.n == 0 {
            return Err(Error::EmptyGraph);
        }
        if !self.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(self.dist.iter().copied().max().unwrap_or(0))
    }
}

pub fn path_lengths(g: &Graph) -> PathLengths {
    let n = g.node_count();
    let mut dist = vec![PathLengths::UNREACHABLE; n * n];
    for s in 0..n {
        for (t, d) in g.bfs(s).into_iter().enumerate() {
            if let Some(d) = d {
                dist[s * n + t] = d;
            }
        }
    }
    PathLengths { n, dist }
}

/// Mean hop distance over ordered pairs of distinct nodes.
pub fn average_path_length(g: &Graph) -> Result<f64> {
    path_lengths(g).average()
}

pub fn diameter(g: &Graph) -> Result<u32> {
    path_lengths(g).diameter()
}

fn triangles_at(g: &Graph, v: NodeId) -> usize {
    let nbrs = g.neighbors(v);
    let mut t = 0;
    for (i, &a) in nbrs.iter().enumerate() {
        for &b in &nbrs[i + 1..] {
            if g.has_edge(a, b) {
                t += 1;
            }
        }
    }
    t
}

/// Local clustering coefficient; zero when `deg(v) < 2`.
pub fn clustering_coefficient(g: &Graph, v: NodeId) -> f64 {
    let k = g.degree(v);
    if k < 2 {
        return 0.0;
    }
    2.0 * triangles_at(g, v) as f64 / (k as f64 * (k as f64 - 1.0))
}

pub fn clustering_centrality(g: &Graph) -> CentralityVector {
    CentralityVector {
        kind: CentralityKind::Clustering,
        values: (0..g.node_count()).map(|v| clustering_coefficient(g, v)).collect(),
        normalized: false,
    }
}

/// Raw degrees as a centrality vector.
pub fn degree_centrality(g: &Graph) -> CentralityVector {
    CentralityVector {
        kind: CentralityKind::Degree,
        values: g.degrees().into_iter().map(|d| d as f64).collect(),
        normalized: false,
    }
}

/// Shortest-path betweenness over unordered pairs (Brandes accumulation on hop counts).
pub fn betweenness_centrality(g: &Graph) -> CentralityVector {
    let n = g.node_count();
    let mut bc = vec![0.0; n];
    let mut stack = Vec::with_capacity(n);
    let mut preds: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![-1i64; n];
    let mut delta = vec![0.0f64; n];
    let mut queue = VecDeque::with_capacity(n);
    for s in 0..n {
        stack.clear();
        for v in 0..n {
            preds[v].clear();
            sigma[v] = 0.0;
            dist[v] = -1;
            delta[v] = 0.0;
        }
        sigma[s] = 1.0;
        dist[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            stack.push(v);
            for &w in g.neighbors(v) {
                if dist[w] < 0 {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        while let Some(w) = stack.pop() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                bc[w] += delta[w];
            }
        }
    }
    for v in &mut bc {
        *v /= 2.0;
    }
    CentralityVector { kind: CentralityKind::Betweenness, values: bc, normalized: false }
}

/// Largest connected component; ties go to the component with the smallest node id.
pub fn giant_component(g: &Graph) -> Result<Graph> {
    if g.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let comps = g.components();
    // components() is ordered by smallest member, so max_by_key keeping the first max works.
    let mut best = &comps[0];
    for c in &comps[1..] {
        if c.len() > best.len() {
            best = c;
        }
    }
    if best.len() == g.node_count() {
        return Ok(g.clone());
    }
    Ok(g.induced_subgraph(best))
}
