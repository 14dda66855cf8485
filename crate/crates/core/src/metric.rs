//! Edge-weighted graphs and the shortest-path metric they induce.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, VecDeque};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

/// Distance to a vertex in another component.
pub const UNREACHABLE: f64 = f64::INFINITY;

pub type VertexId = usize;

/// Undirected graph with strictly positive edge weights.
///
/// Parallel edges are collapsed to their minimum weight on construction, so
/// `edges()` lists every unordered pair at most once with `u < v`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<(VertexId, VertexId, f64)>,
    adj: Vec<Vec<(VertexId, f64)>>,
    labels: BTreeMap<VertexId, String>,
    unit: bool,
}

impl WeightedGraph {
    pub fn new<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (VertexId, VertexId, f64)>,
    {
        let mut collapsed: BTreeMap<(VertexId, VertexId), f64> = BTreeMap::new();
        for (u, v, w) in edges {
            if u >= n {
                return Err(Error::InvalidVertex { id: u, n });
            }
            if v >= n {
                return Err(Error::InvalidVertex { id: v, n });
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidWeight { u, v, w });
            }
            let key = (u.min(v), u.max(v));
            collapsed.entry(key).and_modify(|cur| *cur = cur.min(w)).or_insert(w);
        }
        let edges: Vec<_> = collapsed.into_iter().map(|((u, v), w)| (u, v, w)).collect();
        let mut adj = vec![Vec::new(); n];
        for &(u, v, w) in &edges {
            adj[u].push((v, w));
            adj[v].push((u, w));
        }
        let unit = edges.iter().all(|&(_, _, w)| w == 1.0);
        Ok(Self { n, edges, adj, labels: BTreeMap::new(), unit })
    }

    pub fn with_labels(mut self, labels: BTreeMap<VertexId, String>) -> Result<Self> {
        if let Some((&id, _)) = labels.iter().find(|(&id, _)| id >= self.n) {
            return Err(Error::InvalidVertex { id, n: self.n });
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(VertexId, VertexId, f64)] {
        &self.edges
    }

    pub fn neighbors(&self, v: VertexId) -> &[(VertexId, f64)] {
        &self.adj[v]
    }

    pub fn labels(&self) -> &BTreeMap<VertexId, String> {
        &self.labels
    }

    pub fn label(&self, v: VertexId) -> Option<&str> {
        self.labels.get(&v).map(String::as_str)
    }

    pub fn set_label(&mut self, v: VertexId, label: impl Into<String>) {
        self.labels.insert(v, label.into());
    }

    pub fn check_vertex(&self, v: VertexId) -> Result<()> {
        if v < self.n {
            Ok(())
        } else {
            Err(Error::InvalidVertex { id: v, n: self.n })
        }
    }

    /// True when every edge weight is an integer (so all distances are exact).
    pub fn has_integer_weights(&self) -> bool {
        self.edges.iter().all(|&(_, _, w)| w.fract() == 0.0)
    }
}

#[derive(Copy, Clone, PartialEq)]
struct HeapEntry {
    dist: f64,
    vertex: VertexId,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance
        other.dist.total_cmp(&self.dist).then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest paths (Dijkstra). Unreachable vertices get [`UNREACHABLE`].
pub fn sssp(graph: &WeightedGraph, source: VertexId) -> Result<Vec<f64>> {
    graph.check_vertex(source)?;
    Ok(dijkstra(graph, source))
}

fn dijkstra(graph: &WeightedGraph, source: VertexId) -> Vec<f64> {
    if graph.unit {
        return bfs(graph, source);
    }
    let mut dist = vec![UNREACHABLE; graph.n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(HeapEntry { dist: 0.0, vertex: source });
    while let Some(HeapEntry { dist: d, vertex: u }) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &graph.adj[u] {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(HeapEntry { dist: nd, vertex: v });
            }
        }
    }
    dist
}

/// Breadth-first search for graphs whose edges all have weight 1.
fn bfs(graph: &WeightedGraph, source: VertexId) -> Vec<f64> {
    let mut dist = vec![UNREACHABLE; graph.n];
    let mut queue = VecDeque::with_capacity(graph.n);
    dist[source] = 0.0;
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        let next = dist[u] + 1.0;
        for &(v, _) in &graph.adj[u] {
            if dist[v] == UNREACHABLE {
                dist[v] = next;
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Lazily cached shortest-path distances over a borrowed graph.
///
/// Rows are filled on first use; `prefetch` fills many rows at once on the
/// parallel backend. Filled rows are never mutated, so queries only read.
pub struct DistanceOracle<'g> {
    graph: &'g WeightedGraph,
    rows: Vec<OnceLock<Vec<f64>>>,
}

impl<'g> DistanceOracle<'g> {
    pub fn new(graph: &'g WeightedGraph) -> Self {
        let rows = (0..graph.vertex_count()).map(|_| OnceLock::new()).collect();
        Self { graph, rows }
    }

    pub fn graph(&self) -> &'g WeightedGraph {
        self.graph
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    /// Distances from `source` to every vertex.
    ///
    /// # Panics
    /// If `source` is not a vertex of the graph.
    pub fn row(&self, source: VertexId) -> &[f64] {
        self.rows[source].get_or_init(|| dijkstra(self.graph, source))
    }

    pub fn try_row(&self, source: VertexId) -> Result<&[f64]> {
        self.graph.check_vertex(source)?;
        Ok(self.row(source))
    }

    pub fn dist(&self, u: VertexId, v: VertexId) -> f64 {
        match (self.rows[u].get(), self.rows[v].get()) {
            (Some(row), _) => row[v],
            (None, Some(row)) => row[u],
            (None, None) => self.row(u)[v],
        }
    }

    pub fn is_cached(&self, source: VertexId) -> bool {
        self.rows[source].get().is_some()
    }

    /// Fills the rows of all `sources` that are not cached yet.
    pub fn prefetch(&self, sources: &[VertexId]) {
        let missing: Vec<VertexId> = sources.iter().copied().filter(|&s| !self.is_cached(s)).collect();
        par::for_each_slice(&missing, |&s| {
            self.row(s);
        });
    }

    pub fn prefetch_all(&self) {
        let all: Vec<VertexId> = (0..self.vertex_count()).collect();
        self.prefetch(&all);
    }

    /// Full distance matrix (fills every row).
    pub fn all_pairs(&self) -> Vec<Vec<f64>> {
        self.prefetch_all();
        (0..self.vertex_count()).map(|s| self.row(s).to_vec()).collect()
    }

    /// `dist(v, X) = min_{x in X} dist(v, x)` for a non-empty slice.
    pub fn dist_to_slice(&self, v: VertexId, xs: &[VertexId]) -> f64 {
        let row = self.row(v);
        xs.iter().map(|&x| row[x]).fold(UNREACHABLE, f64::min)
    }
}

/// Sorted, duplicate-free set of vertices of one graph. Serializes as a plain
/// id list.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "Vec<VertexId>", from = "Vec<VertexId>")]
pub struct PointSet {
    members: Vec<VertexId>,
}

impl PointSet {
    pub fn new<I: IntoIterator<Item = VertexId>>(ids: I, vertex_count: usize) -> Result<Self> {
        let mut members: Vec<VertexId> = ids.into_iter().collect();
        if let Some(&bad) = members.iter().find(|&&v| v >= vertex_count) {
            return Err(Error::InvalidVertex { id: bad, n: vertex_count });
        }
        members.sort_unstable();
        members.dedup();
        Ok(Self { members })
    }

    /// Builds a set without range checking; ids are sorted and deduplicated.
    pub fn from_ids<I: IntoIterator<Item = VertexId>>(ids: I) -> Self {
        let mut members: Vec<VertexId> = ids.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        Self { members }
    }

    pub fn all(vertex_count: usize) -> Self {
        Self { members: (0..vertex_count).collect() }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    pub fn as_slice(&self) -> &[VertexId] {
        &self.members
    }

    pub fn iter(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.members.iter().copied()
    }

    pub fn first(&self) -> Option<VertexId> {
        self.members.first().copied()
    }

    pub fn insert(&mut self, v: VertexId) -> bool {
        match self.members.binary_search(&v) {
            Ok(_) => false,
            Err(pos) => {
                self.members.insert(pos, v);
                true
            }
        }
    }

    pub fn union(&self, other: &PointSet) -> PointSet {
        PointSet::from_ids(self.iter().chain(other.iter()))
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.iter().all(|v| other.contains(v))
    }
}

impl From<Vec<VertexId>> for PointSet {
    fn from(ids: Vec<VertexId>) -> Self {
        PointSet::from_ids(ids)
    }
}

impl From<PointSet> for Vec<VertexId> {
    fn from(set: PointSet) -> Self {
        set.members
    }
}

impl FromIterator<VertexId> for PointSet {
    fn from_iter<T: IntoIterator<Item = VertexId>>(iter: T) -> Self {
        PointSet::from_ids(iter)
    }
}

fn check_points(graph: &WeightedGraph, points: &PointSet) -> Result<()> {
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    match points.as_slice().last() {
        Some(&v) => graph.check_vertex(v),
        None => Ok(()),
    }
}

/// Point of `points` furthest from `v`; ties go to the smallest id.
pub fn furthest_neighbor(oracle: &DistanceOracle<'_>, v: VertexId, points: &PointSet) -> Result<(VertexId, f64)> {
    check_points(oracle.graph(), points)?;
    let row = oracle.try_row(v)?;
    let mut best = (points.as_slice()[0], f64::NEG_INFINITY);
    for p in points.iter() {
        let d = row[p];
        if d == UNREACHABLE {
            return Err(Error::Disconnected { from: v, to: p });
        }
        if d > best.1 {
            best = (p, d);
        }
    }
    Ok(best)
}

/// Largest distance between two points of `points`.
pub fn diameter(oracle: &DistanceOracle<'_>, points: &PointSet) -> Result<f64> {
    check_points(oracle.graph(), points)?;
    oracle.prefetch(points.as_slice());
    let mut best = 0.0f64;
    for u in points.iter() {
        let row = oracle.row(u);
        for v in points.iter() {
            let d = row[v];
            if d == UNREACHABLE {
                return Err(Error::Disconnected { from: u, to: v });
            }
            best = best.max(d);
        }
    }
    Ok(best)
}

/// `min_{x in X} dist(v, x)`.
pub fn dist_to_set(oracle: &DistanceOracle<'_>, v: VertexId, set: &PointSet) -> Result<f64> {
    check_points(oracle.graph(), set)?;
    oracle.graph().check_vertex(v)?;
    Ok(oracle.dist_to_slice(v, set.as_slice()))
}

/// Fails with [`Error::Disconnected`] unless every point reaches every vertex
/// in `queries`.
pub fn require_connected(oracle: &DistanceOracle<'_>, points: &PointSet, queries: &[VertexId]) -> Result<()> {
    check_points(oracle.graph(), points)?;
    let anchor = points.as_slice()[0];
    let row = oracle.row(anchor);
    for &q in queries.iter().chain(points.as_slice()) {
        if row[q] == UNREACHABLE {
            return Err(Error::Disconnected { from: anchor, to: q });
        }
    }
    Ok(())
}
