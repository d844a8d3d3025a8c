//! Centralised graph constructions: geometric graphs, the critical and
//! degree-1 radii, hop distances and the edge disparity measure.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use crate::geometry::{pairs_within, Deployment};
use crate::{Error, Result};

/// Undirected simple graph over ids `0..n`.
///
/// Edges are stored once as `(i, j)` with `i < j`, sorted; adjacency lists
/// are sorted as well.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeGraph {
    n: usize,
    edges: Vec<(u32, u32)>,
    adj: Vec<Vec<u32>>,
    radius: Option<f64>,
}

impl EdgeGraph {
    /// Normalises `edges` (orientation, duplicates, self-loops dropped).
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut list = Vec::new();
        for (a, b) in edges {
            for id in [a, b] {
                if id >= n {
                    return Err(Error::NodeOutOfRange { id, n });
                }
            }
            if a != b {
                list.push((a.min(b) as u32, a.max(b) as u32));
            }
        }
        list.sort_unstable();
        list.dedup();
        Ok(Self::from_sorted(n, list, None))
    }

    pub fn empty(n: usize) -> Self {
        Self::from_sorted(n, Vec::new(), None)
    }

    /// Tags the graph with the radius it was built at.
    pub fn with_radius(mut self, r: f64) -> Self {
        self.radius = Some(r);
        self
    }

    fn from_sorted(n: usize, edges: Vec<(u32, u32)>, radius: Option<f64>) -> Self {
        let mut adj = alloc::vec![Vec::new(); n];
        for &(a, b) in &edges {
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        for l in &mut adj {
            l.sort_unstable();
        }
        Self {
            n,
            edges,
            adj,
            radius,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.adj[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    pub fn min_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).min().unwrap_or(0)
    }

    /// Radius when built as a geometric graph.
    pub fn radius(&self) -> Option<f64> {
        self.radius
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && self.adj[i].binary_search(&(j as u32)).is_ok()
    }

    /// Connected component label per node, labels `0..count` in order of
    /// first appearance.
    pub fn components(&self) -> (usize, Vec<u32>) {
        let mut label = alloc::vec![u32::MAX; self.n];
        let mut count = 0u32;
        let mut queue = VecDeque::new();
        for s in 0..self.n {
            if label[s] != u32::MAX {
                continue;
            }
            label[s] = count;
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                for &v in &self.adj[u] {
                    if label[v as usize] == u32::MAX {
                        label[v as usize] = count;
                        queue.push_back(v as usize);
                    }
                }
            }
            count += 1;
        }
        (count as usize, label)
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.components().0 == 1
    }

    /// Subgraph induced by `ids`, renumbered by position in `ids`.
    pub fn induced(&self, ids: &[usize]) -> Result<EdgeGraph> {
        let mut map = alloc::vec![u32::MAX; self.n];
        for (k, &i) in ids.iter().enumerate() {
            if i >= self.n {
                return Err(Error::NodeOutOfRange { id: i, n: self.n });
            }
            map[i] = k as u32;
        }
        let mut edges: Vec<(u32, u32)> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| {
                let (x, y) = (map[a as usize], map[b as usize]);
                (x != u32::MAX && y != u32::MAX).then(|| (x.min(y), x.max(y)))
            })
            .collect();
        edges.sort_unstable();
        Ok(Self::from_sorted(ids.len(), edges, self.radius))
    }

    /// Longest edge under the deployment's metric (0 for an empty graph).
    pub fn max_edge_length(&self, dep: &Deployment) -> f64 {
        self.edges
            .iter()
            .map(|&(a, b)| dep.d(a as usize, b as usize))
            .fold(0.0, f64::max)
    }
}

/// Geometric graph: edge `(i, j)` iff `d(i, j) <= r`.
pub fn build_gg(dep: &Deployment, r: f64) -> Result<EdgeGraph> {
    if !(r >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "r",
            reason: "radius must be non-negative",
        });
    }
    let edges = pairs_within(dep, r);
    Ok(EdgeGraph::from_sorted(dep.len(), edges, Some(r)))
}

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
    sets: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: alloc::vec![1; n],
            sets: n,
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let p = self.parent[x] as usize;
            self.parent[x] = self.parent[p];
            x = p;
        }
        x
    }

    /// Returns `true` if the two sets were distinct.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            core::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra as u32;
        self.size[ra] += self.size[rb];
        self.sets -= 1;
        true
    }

    pub fn sets(&self) -> usize {
        self.sets
    }
}

/// Smallest radius at which the geometric graph is connected, with that
/// graph.
///
/// Pairs are inserted into a union-find in ascending length order until one
/// component remains; the critical radius is the last inserted length.
/// Candidate pairs are collected up to a bound that starts at twice the
/// degree-1 radius and doubles until the forest is spanning, which only
/// skips pairs longer than the answer.
pub fn critical_radius(dep: &Deployment) -> Result<(f64, EdgeGraph)> {
    let n = dep.len();
    if n < 2 {
        return Err(Error::TooFewNodes { n });
    }
    let (r1, _) = nearest_neighbor_radius(dep);
    let diag = crate::math::sqrt(
        dep.region.width * dep.region.width + dep.region.height * dep.region.height,
    );
    let mut bound = if r1 > 0.0 { 2.0 * r1 } else { diag / n as f64 };
    loop {
        let last = bound >= diag;
        let bound_now = if last { f64::INFINITY } else { bound };
        let mut cand: Vec<(f64, u32, u32)> = pairs_within(dep, bound_now)
            .into_iter()
            .map(|(a, b)| (dep.d(a as usize, b as usize), a, b))
            .collect();
        cand.sort_unstable_by(|x, y| x.0.total_cmp(&y.0).then((x.1, x.2).cmp(&(y.1, y.2))));
        let mut uf = UnionFind::new(n);
        for &(d, a, b) in &cand {
            if uf.union(a as usize, b as usize) && uf.sets() == 1 {
                return Ok((d, build_gg(dep, d)?));
            }
        }
        if last {
            // all pairs inserted; only reachable with non-finite coordinates
            return Err(Error::NotConnected);
        }
        bound *= 2.0;
    }
}

/// `max_i min_{j != i} d(i, j)` and the per-node nearest distances.
fn nearest_neighbor_radius(dep: &Deployment) -> (f64, Vec<f64>) {
    let nn = nearest_distances(dep);
    (nn.iter().copied().fold(0.0, f64::max), nn)
}

/// Nearest-neighbour distance of every node.
pub fn nearest_distances(dep: &Deployment) -> Vec<f64> {
    let n = dep.len();
    let mut nn = alloc::vec![f64::INFINITY; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = dep.d(i, j);
            if d < nn[i] {
                nn[i] = d;
            }
            if d < nn[j] {
                nn[j] = d;
            }
        }
    }
    nn
}

/// Degree-1 radius (largest nearest-neighbour distance) and its geometric
/// graph, which has no isolated node.
pub fn degree1_radius(dep: &Deployment) -> Result<(f64, EdgeGraph)> {
    let n = dep.len();
    if n < 2 {
        return Err(Error::TooFewNodes { n });
    }
    let (r1, _) = nearest_neighbor_radius(dep);
    Ok((r1, build_gg(dep, r1)?))
}

/// Hop counts from one source; `None` marks unreachable nodes.
pub fn bfs(g: &EdgeGraph, source: usize) -> Vec<Option<u32>> {
    let mut dist = alloc::vec![None; g.n()];
    if source >= g.n() {
        return dist;
    }
    let mut queue = VecDeque::new();
    dist[source] = Some(0);
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap_or(0);
        for &v in g.neighbors(u) {
            let v = v as usize;
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Hop distances from a set of sources. `None` is the unreachable marker.
#[derive(Debug, Clone, PartialEq)]
pub struct HopTable {
    sources: Vec<usize>,
    rows: Vec<Vec<Option<u32>>>,
}

impl HopTable {
    pub fn sources(&self) -> &[usize] {
        &self.sources
    }

    pub fn row(&self, source: usize) -> Option<&[Option<u32>]> {
        self.sources
            .iter()
            .position(|&s| s == source)
            .map(|k| self.rows[k].as_slice())
    }

    /// Hop count between `a` and `b`, looked up from whichever is a source.
    /// The outer `None` means neither endpoint is a source.
    pub fn get(&self, a: usize, b: usize) -> Option<Option<u32>> {
        if let Some(r) = self.row(a) {
            return r.get(b).copied();
        }
        self.row(b).and_then(|r| r.get(a).copied())
    }
}

pub fn hop_distances(g: &EdgeGraph, sources: &[usize]) -> Result<HopTable> {
    for &s in sources {
        if s >= g.n() {
            return Err(Error::NodeOutOfRange { id: s, n: g.n() });
        }
    }
    Ok(HopTable {
        sources: sources.to_vec(),
        rows: sources.iter().map(|&s| bfs(g, s)).collect(),
    })
}

/// Hop diameter; `None` when the graph is disconnected.
pub fn graph_diameter(g: &EdgeGraph) -> Option<u32> {
    let mut best = 0;
    for s in 0..g.n() {
        for d in bfs(g, s) {
            best = best.max(d?);
        }
    }
    Some(best)
}

/// Fraction of `ga`'s edges that are absent from `gb`.
pub fn disparity(ga: &EdgeGraph, gb: &EdgeGraph) -> Result<f64> {
    if ga.n() != gb.n() {
        return Err(Error::NodeCountMismatch {
            left: ga.n(),
            right: gb.n(),
        });
    }
    if ga.edge_count() == 0 {
        return Err(Error::EmptyEdgeSet);
    }
    let missing = ga
        .edges()
        .iter()
        .filter(|&&(a, b)| !gb.has_edge(a as usize, b as usize))
        .count();
    Ok(missing as f64 / ga.edge_count() as f64)
}
