//! Edge-disjoint census of connected 4-node motifs.
//!
//! Candidates are generated per node by star expansion and path expansion,
//! classified by a Weisfeiler–Lehman hash of the induced subgraph, and
//! counted greedily: an instance is only counted if none of its induced
//! edges was claimed by an earlier instance. The result is a conservative
//! lower bound that depends on visiting order, which is fixed (ascending
//! node ids, lexicographic combinations) for reproducibility.

use std::collections::BTreeMap;
use std::hash::{DefaultHasher, Hash, Hasher};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, NodeId};

pub const WL_ITERATIONS: usize = 3;
pub const BRUTE_FORCE_LIMIT: usize = 30;

/// The six connected graphs on four nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MotifKind {
    Path4,
    Star4,
    Cycle4,
    Paw,
    Diamond,
    Clique4,
}

impl MotifKind {
    pub const ALL: [MotifKind; 6] = [
        MotifKind::Path4,
        MotifKind::Star4,
        MotifKind::Cycle4,
        MotifKind::Paw,
        MotifKind::Diamond,
        MotifKind::Clique4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MotifKind::Path4 => "path4",
            MotifKind::Star4 => "star4",
            MotifKind::Cycle4 => "cycle4",
            MotifKind::Paw => "paw",
            MotifKind::Diamond => "diamond",
            MotifKind::Clique4 => "clique4",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == name)
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Canonical edge set on nodes 0..4.
    pub fn edges(self) -> &'static [(usize, usize)] {
        match self {
            MotifKind::Path4 => &[(0, 1), (1, 2), (2, 3)],
            MotifKind::Star4 => &[(0, 1), (0, 2), (0, 3)],
            MotifKind::Cycle4 => &[(0, 1), (1, 2), (2, 3), (0, 3)],
            MotifKind::Paw => &[(0, 1), (0, 2), (1, 2), (2, 3)],
            MotifKind::Diamond => &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)],
            MotifKind::Clique4 => &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
        }
    }

    pub fn edge_count(self) -> usize {
        self.edges().len()
    }

    pub fn degree_multiset(self) -> [u8; 4] {
        SmallGraph::from_edges(4, self.edges()).unwrap().degree_multiset()
    }

    /// Classification by sorted degree sequence; the six sequences are distinct.
    pub fn from_degree_multiset(d: [u8; 4]) -> Option<Self> {
        match d {
            [1, 1, 2, 2] => Some(MotifKind::Path4),
            [1, 1, 1, 3] => Some(MotifKind::Star4),
            [2, 2, 2, 2] => Some(MotifKind::Cycle4),
            [1, 2, 2, 3] => Some(MotifKind::Paw),
            [2, 2, 3, 3] => Some(MotifKind::Diamond),
            [3, 3, 3, 3] => Some(MotifKind::Clique4),
            _ => None,
        }
    }
}

impl std::fmt::Display for MotifKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A graph on at most 8 nodes stored as adjacency bitmasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SmallGraph {
    n: usize,
    adj: [u8; 8],
}

impl SmallGraph {
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n > 8 {
            return Err(Error::InvalidParameter(format!("small graph limited to 8 nodes, got {n}")));
        }
        let mut adj = [0u8; 8];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::NodeOutOfRange(u.max(v)));
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            adj[u] |= 1 << v;
            adj[v] |= 1 << u;
        }
        Ok(Self { n, adj })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn degree(&self, u: usize) -> u8 {
        self.adj[u].count_ones() as u8
    }

    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&v| self.adj[u] & (1 << v) != 0)
    }

    pub fn degree_multiset(&self) -> [u8; 4] {
        let mut d = [0u8; 4];
        for (i, slot) in d.iter_mut().enumerate().take(self.n.min(4)) {
            *slot = self.degree(i);
        }
        d[..self.n.min(4)].sort_unstable();
        d
    }

    /// Same graph with nodes renamed by `perm[old] = new`.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        let mut adj = [0u8; 8];
        for u in 0..self.n {
            for v in self.neighbors(u) {
                adj[perm[u]] |= 1 << perm[v];
            }
        }
        Self { n: self.n, adj }
    }
}

fn hash_of<T: Hash>(value: &T) -> u64 {
    let mut h = DefaultHasher::new();
    value.hash(&mut h);
    h.finish()
}

/// Weisfeiler–Lehman digest of a 4-node graph.
///
/// Labels start as degrees; each round a node's label becomes the hash of
/// its own label and the sorted labels of its neighbors. The digest hashes
/// the sorted final labels.
pub fn wl_hash(h: &SmallGraph, iterations: usize) -> Result<u64> {
    if h.n != 4 {
        return Err(Error::WrongNodeCount { expected: 4, got: h.n });
    }
    Ok(wl_digest(h, iterations))
}

fn wl_digest(h: &SmallGraph, iterations: usize) -> u64 {
    let mut labels = [0u64; 4];
    for (u, l) in labels.iter_mut().enumerate() {
        *l = h.degree(u) as u64;
    }
    for _ in 0..iterations {
        let mut next = [0u64; 4];
        for (u, slot) in next.iter_mut().enumerate() {
            let mut nb = [u64::MAX; 4];
            let mut k = 0;
            for v in h.neighbors(u) {
                nb[k] = labels[v];
                k += 1;
            }
            nb[..k].sort_unstable();
            *slot = hash_of(&(labels[u], &nb[..k]));
        }
        labels = next;
    }
    labels.sort_unstable();
    hash_of(&labels)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotifTemplate {
    pub kind: MotifKind,
    pub wl_signature: u64,
    pub degree_multiset: [u8; 4],
}

impl MotifTemplate {
    pub fn edge_count(&self) -> usize {
        self.kind.edge_count()
    }
}

/// Templates in matching priority: densest first.
pub fn templates() -> Vec<MotifTemplate> {
    let mut t: Vec<MotifTemplate> = MotifKind::ALL
        .iter()
        .map(|&kind| {
            let g = SmallGraph::from_edges(4, kind.edges()).unwrap();
            MotifTemplate { kind, wl_signature: wl_digest(&g, WL_ITERATIONS), degree_multiset: g.degree_multiset() }
        })
        .collect();
    t.sort_by_key(|m| std::cmp::Reverse((m.edge_count(), m.kind)));
    t
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MotifInstance {
    pub nodes: [NodeId; 4],
    pub kind: MotifKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MotifCensus {
    counts: [usize; 6],
    /// Claimed edges as canonical `(min, max)` pairs, sorted.
    pub used_edges: Vec<(NodeId, NodeId)>,
    pub instances: Vec<MotifInstance>,
    pub total_edges: usize,
}

impl MotifCensus {
    pub fn count(&self, kind: MotifKind) -> usize {
        self.counts[kind.index()]
    }

    pub fn counts(&self) -> BTreeMap<MotifKind, usize> {
        MotifKind::ALL.iter().map(|&k| (k, self.count(k))).collect()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Counts for the kinds with at least one instance.
    pub fn nonzero(&self) -> BTreeMap<MotifKind, usize> {
        self.counts().into_iter().filter(|&(_, c)| c > 0).collect()
    }

    /// Checks that counted instances are pairwise edge-disjoint and agree with `used_edges`.
    pub fn check_edge_disjoint(&self, g: &Graph) -> bool {
        let mut seen = std::collections::HashSet::new();
        let mut claimed = 0;
        for inst in &self.instances {
            for i in 0..4 {
                for j in i + 1..4 {
                    let (a, b) = (inst.nodes[i], inst.nodes[j]);
                    if g.has_edge(a, b) {
                        claimed += 1;
                        if !seen.insert((a.min(b), a.max(b))) {
                            return false;
                        }
                    }
                }
            }
        }
        let by_kind: usize = MotifKind::ALL.iter().map(|&k| self.count(k) * k.edge_count()).sum();
        claimed == self.used_edges.len() && by_kind == claimed && claimed <= self.total_edges
    }
}

struct CensusState<'g> {
    g: &'g Graph,
    templates: Vec<MotifTemplate>,
    used: Vec<bool>,
    counts: [usize; 6],
    instances: Vec<MotifInstance>,
}

impl<'g> CensusState<'g> {
    fn new(g: &'g Graph) -> Self {
        Self { g, templates: templates(), used: vec![false; g.edge_count()], counts: [0; 6], instances: Vec::new() }
    }

    fn process(&mut self, s: [NodeId; 4]) {
        let mut eids: [EdgeId; 6] = [0; 6];
        let mut pairs = [(0usize, 0usize); 6];
        let mut k = 0;
        for i in 0..4 {
            for j in i + 1..4 {
                if let Some(e) = self.g.edge_id(s[i], s[j]) {
                    if self.used[e] {
                        return;
                    }
                    eids[k] = e;
                    pairs[k] = (i, j);
                    k += 1;
                }
            }
        }
        let sub = SmallGraph::from_edges(4, &pairs[..k]).unwrap();
        let h = wl_digest(&sub, WL_ITERATIONS);
        if let Some(t) = self.templates.iter().find(|t| t.wl_signature == h) {
            self.counts[t.kind.index()] += 1;
            for &e in &eids[..k] {
                self.used[e] = true;
            }
            let mut nodes = s;
            nodes.sort_unstable();
            self.instances.push(MotifInstance { nodes, kind: t.kind });
        }
    }

    fn finish(self) -> MotifCensus {
        let used_edges = (0..self.g.edge_count()).filter(|&e| self.used[e]).map(|e| self.g.edge(e)).collect();
        MotifCensus { counts: self.counts, used_edges, instances: self.instances, total_edges: self.g.edge_count() }
    }
}

/// Greedy edge-disjoint census by star and path expansion around each node.
pub fn census(g: &Graph) -> MotifCensus {
    let mut st = CensusState::new(g);
    for u in 0..g.node_count() {
        let nu = g.neighbors(u);
        let eu = g.incident_edges(u);
        // Star expansion.
        if nu.len() >= 3 {
            for a in 0..nu.len() {
                if st.used[eu[a]] {
                    continue;
                }
                for b in a + 1..nu.len() {
                    if st.used[eu[b]] {
                        continue;
                    }
                    for c in b + 1..nu.len() {
                        if !st.used[eu[c]] {
                            st.process([u, nu[a], nu[b], nu[c]]);
                        }
                    }
                }
            }
        }
        // Path expansion u - v - w - x. A claimed path edge is an induced
        // edge of the candidate, so such walks are pruned early.
        for (i, &v) in nu.iter().enumerate() {
            if st.used[eu[i]] {
                continue;
            }
            let nv = g.neighbors(v);
            let ev = g.incident_edges(v);
            for (j, &w) in nv.iter().enumerate() {
                if w == u || st.used[ev[j]] {
                    continue;
                }
                let nw = g.neighbors(w);
                let ew = g.incident_edges(w);
                for (k, &x) in nw.iter().enumerate() {
                    if x == u || x == v || st.used[ew[k]] {
                        continue;
                    }
                    if st.used[eu[i]] || st.used[ev[j]] {
                        break;
                    }
                    st.process([u, v, w, x]);
                }
            }
        }
    }
    st.finish()
}

/// Motif concentrations `N_i / Σ N_i`.
pub fn concentration(c: &MotifCensus) -> Result<BTreeMap<MotifKind, f64>> {
    let total = c.total();
    if total == 0 {
        return Err(Error::NoMotifs);
    }
    Ok(c.counts().into_iter().map(|(k, n)| (k, n as f64 / total as f64)).collect())
}

/// Order in which [`brute_force_census`] visits candidate node sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateOrder {
    /// All 4-subsets in lexicographic order.
    Lexicographic,
    /// The order in which [`census`] first generates each set.
    Traversal,
}

/// Position at which the star/path traversal first emits `s`, if ever.
fn traversal_key(g: &Graph, s: [NodeId; 4]) -> Option<(NodeId, u8, [NodeId; 3])> {
    let mut best: Option<(NodeId, u8, [NodeId; 3])> = None;
    for (i, &u) in s.iter().enumerate() {
        let mut rest = [0; 3];
        let mut k = 0;
        for (j, &x) in s.iter().enumerate() {
            if j != i {
                rest[k] = x;
                k += 1;
            }
        }
        rest.sort_unstable();
        let mut keys = Vec::new();
        if rest.iter().all(|&x| g.has_edge(u, x)) {
            keys.push((u, 0u8, rest));
        }
        for perm in PERMS_3 {
            let (v, w, x) = (rest[perm[0]], rest[perm[1]], rest[perm[2]]);
            if g.has_edge(u, v) && g.has_edge(v, w) && g.has_edge(w, x) {
                keys.push((u, 1u8, [v, w, x]));
            }
        }
        for key in keys {
            if best.is_none_or(|b| key < b) {
                best = Some(key);
            }
        }
    }
    best
}

const PERMS_3: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

fn is_connected_4(adj: &[[bool; 4]; 4]) -> bool {
    let mut seen = [true, false, false, false];
    let mut stack = vec![0];
    while let Some(u) = stack.pop() {
        for v in 0..4 {
            if adj[u][v] && !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen.iter().all(|&s| s)
}

/// Exhaustive census over all 4-subsets; a test oracle for [`census`].
///
/// Classification uses degree sequences and connectivity is checked
/// directly, so it shares no code path with the hashed scan. With
/// [`CandidateOrder::Traversal`] the greedy claiming order matches
/// [`census`] exactly.
pub fn brute_force_census(g: &Graph, order: CandidateOrder) -> Result<MotifCensus> {
    let n = g.node_count();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::GraphTooLarge(n, BRUTE_FORCE_LIMIT));
    }
    let mut candidates: Vec<([NodeId; 4], MotifKind)> = Vec::new();
    let mut keys = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                for d in c + 1..n {
                    let s = [a, b, c, d];
                    let mut adj = [[false; 4]; 4];
                    let mut deg = [0u8; 4];
                    for i in 0..4 {
                        for j in 0..4 {
                            if i != j && g.has_edge(s[i], s[j]) {
                                adj[i][j] = true;
                                deg[i] += 1;
                            }
                        }
                    }
                    if !is_connected_4(&adj) {
                        continue;
                    }
                    deg.sort_unstable();
                    let kind = MotifKind::from_degree_multiset(deg).expect("connected 4-node graph");
                    if order == CandidateOrder::Traversal {
                        keys.push(traversal_key(g, s).expect("connected sets are always generated"));
                    }
                    candidates.push((s, kind));
                }
            }
        }
    }
    if order == CandidateOrder::Traversal {
        let mut idx: Vec<usize> = (0..candidates.len()).collect();
        idx.sort_by_key(|&i| keys[i]);
        candidates = idx.into_iter().map(|i| candidates[i]).collect();
    }
    let mut used = std::collections::BTreeSet::new();
    let mut counts = [0usize; 6];
    let mut instances = Vec::new();
    for (s, kind) in candidates {
        let induced: Vec<(NodeId, NodeId)> = (0..4)
            .flat_map(|i| (i + 1..4).map(move |j| (s[i], s[j])))
            .filter(|&(x, y)| g.has_edge(x, y))
            .collect();
        if induced.iter().any(|e| used.contains(e)) {
            continue;
        }
        used.extend(induced);
        counts[kind.index()] += 1;
        instances.push(MotifInstance { nodes: s, kind });
    }
    Ok(MotifCensus { counts, used_edges: used.into_iter().collect(), instances, total_edges: g.edge_count() })
}
