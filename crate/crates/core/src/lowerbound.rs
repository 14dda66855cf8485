//! Explicit `(k, d)`-comatching families on unweighted-threshold graphs, and
//! an exhaustive verifier for them.
//!
//! An entry list `(v, X_v)` is a `(k, d)`-comatching when every `|X_v| <= k`,
//! `dist(v, X_v) > d` and `dist(v, X_w) <= d` for all `w != v`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{sssp, VertexId, WeightedGraph};
use crate::par;

pub type Entries = Vec<(VertexId, Vec<VertexId>)>;

/// One local gadget of the planar family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gadget {
    /// 1-based level in the nesting.
    pub level: usize,
    pub root: VertexId,
    /// Cycle vertices in cyclic order.
    pub cycle: Vec<VertexId>,
    /// Pendant endpoint of each cycle vertex, aligned with `cycle`.
    pub hats: Vec<VertexId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    /// Two mirrored binary trees of the given height joined by sibling edges.
    Soko { height: usize },
    /// Binary tree with pendant paths.
    TreeK { depth: usize },
    /// Nested cycle gadgets; `parts[i] = (k_i, d_i)`.
    PlanarKd { parts: Vec<(usize, usize)>, gadgets: Vec<Gadget> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundInstance {
    pub family: Family,
    pub graph: WeightedGraph,
    pub entries: Entries,
    /// Largest allowed `|X_v|`.
    pub k: usize,
    /// Distance threshold.
    pub d: usize,
    /// Pendant endpoint `u -> hat(u)` where the family has one.
    pub hats: BTreeMap<VertexId, VertexId>,
}

impl LowerBoundInstance {
    /// Entries as `(v, x)` pairs; only meaningful when `k == 1`.
    pub fn pairs(&self) -> Vec<(VertexId, VertexId)> {
        self.entries.iter().map(|(v, xs)| (*v, xs[0])).collect()
    }

    pub fn verify(&self) -> Result<LowerBoundReport> {
        verify_lower_bound(&self.graph, &self.entries, self.k, self.d)
    }
}

#[derive(Default)]
struct Builder {
    n: usize,
    edges: Vec<(VertexId, VertexId, f64)>,
    labels: BTreeMap<VertexId, String>,
}

impl Builder {
    fn vertex(&mut self) -> VertexId {
        self.n += 1;
        self.n - 1
    }

    fn edge(&mut self, u: VertexId, v: VertexId, w: f64) {
        self.edges.push((u, v, w));
    }

    /// Path of `len` unit edges from `from`; returns the far endpoint.
    fn path(&mut self, from: VertexId, len: usize) -> VertexId {
        let mut cur = from;
        for _ in 0..len {
            let next = self.vertex();
            self.edge(cur, next, 1.0);
            cur = next;
        }
        cur
    }

    /// Path of `len` unit edges between two existing vertices.
    fn connect(&mut self, from: VertexId, to: VertexId, len: usize) {
        let end = self.path(from, len - 1);
        self.edge(end, to, 1.0);
    }

    fn finish(self) -> Result<WeightedGraph> {
        WeightedGraph::new(self.n, self.edges)?.with_labels(self.labels)
    }
}

fn heap_depth(v: usize) -> usize {
    (usize::BITS - 1 - (v + 1).leading_zeros()) as usize
}

fn heap_sibling(v: usize) -> usize {
    if v % 2 == 1 {
        v + 1
    } else {
        v - 1
    }
}

/// Two complete binary trees `T_1`, `T_2` of height `k` in heap order
/// (`T_1` on ids `0..N`, its mirror `I(v) = v + N` on `N..2N`), plus a
/// matching edge `(v, I(sibling(v)))` of weight `2 depth(v) - 1` for every
/// non-root `v` of `T_1`. The entries pair each top leaf with its mirror.
pub fn gen_soko(k: usize) -> Result<LowerBoundInstance> {
    if k < 3 {
        return Err(Error::param(format!("soko height must be at least 3, got {k}")));
    }
    if k > 20 {
        return Err(Error::CapExceeded { what: "soko height", limit: 20, actual: k });
    }
    let n_tree = (1usize << (k + 1)) - 1;
    let mut b = Builder { n: 2 * n_tree, ..Builder::default() };
    for v in 1..n_tree {
        let parent = (v - 1) / 2;
        b.edge(parent, v, 1.0);
        b.edge(parent + n_tree, v + n_tree, 1.0);
        b.edge(v, heap_sibling(v) + n_tree, (2 * heap_depth(v) - 1) as f64);
    }
    b.labels.insert(0, "r1".into());
    b.labels.insert(n_tree, "r2".into());
    let first_leaf = (1usize << k) - 1;
    let mut entries = Vec::with_capacity(1 << k);
    for (j, l) in (first_leaf..n_tree).enumerate() {
        b.labels.insert(l, format!("top-leaf-{j}"));
        b.labels.insert(l + n_tree, format!("bottom-leaf-{j}"));
        entries.push((l, vec![l + n_tree]));
    }
    Ok(LowerBoundInstance {
        family: Family::Soko { height: k },
        graph: b.finish()?,
        entries,
        k: 1,
        d: 2 * k - 1,
        hats: BTreeMap::new(),
    })
}

/// Full binary tree `T_k` (heap order) with a pendant path of length
/// `depth(u)` at every non-root `u`. Leaf `v` gets `X_v` = hats of the
/// siblings along its root path.
pub fn gen_tree_k(k: usize) -> Result<LowerBoundInstance> {
    if k == 0 {
        return Err(Error::param("tree depth must be at least 1"));
    }
    if k > 16 {
        return Err(Error::CapExceeded { what: "tree depth", limit: 16, actual: k });
    }
    let n_tree = (1usize << (k + 1)) - 1;
    let mut b = Builder { n: n_tree, ..Builder::default() };
    let mut hats = BTreeMap::new();
    for u in 1..n_tree {
        b.edge((u - 1) / 2, u, 1.0);
        let hat = b.path(u, heap_depth(u));
        b.labels.insert(hat, format!("hat-{u}"));
        hats.insert(u, hat);
    }
    let first_leaf = (1usize << k) - 1;
    let mut entries = Vec::with_capacity(1 << k);
    for (j, v) in (first_leaf..n_tree).enumerate() {
        b.labels.insert(v, format!("leaf-{j}"));
        let mut xs = Vec::with_capacity(k);
        let mut cur = v;
        while cur != 0 {
            xs.push(hats[&heap_sibling(cur)]);
            cur = (cur - 1) / 2;
        }
        entries.push((v, xs));
    }
    Ok(LowerBoundInstance { family: Family::TreeK { depth: k }, graph: b.finish()?, entries, k, d: k + 1, hats })
}

/// Splits `total` into `parts` positive integers differing by at most one,
/// larger parts first.
pub fn split_evenly(total: usize, parts: usize) -> Vec<usize> {
    (0..parts).map(|i| total / parts + usize::from(i < total % parts)).collect()
}

/// `prod (1 + k_i (2 d_i + 1))`, the number of entries of [`gen_planar_kd`].
pub fn planar_kd_size(k: usize, d: usize) -> usize {
    let h = k.min(d);
    split_evenly(k, h).into_iter().zip(split_evenly(d, h)).map(|(ki, di)| 1 + ki * (2 * di + 1)).product()
}

/// Largest entry count [`gen_planar_kd`] will build.
pub const PLANAR_KD_ENTRY_CAP: usize = 100_000;

struct PlanarBuild {
    parts: Vec<(usize, usize)>,
    b: Builder,
    gadgets: Vec<Gadget>,
    entries: Entries,
    hats: BTreeMap<VertexId, VertexId>,
}

impl PlanarBuild {
    fn gadget(&mut self, level: usize, root: VertexId, path: &mut Vec<(usize, usize)>) {
        let (ki, di) = self.parts[level];
        let len = 1 + ki * (2 * di + 1);
        let pendant: usize = self.parts[..level].iter().map(|p| p.1).sum();
        let cycle: Vec<VertexId> = (0..len).map(|_| self.b.vertex()).collect();
        for j in 0..len {
            self.b.edge(cycle[j], cycle[(j + 1) % len], 1.0);
            self.b.connect(root, cycle[j], di);
        }
        let hats: Vec<VertexId> = cycle.iter().map(|&c| self.b.path(c, pendant)).collect();
        for (&c, &hat) in cycle.iter().zip(&hats) {
            self.hats.insert(c, hat);
        }
        let id = self.gadgets.len();
        self.b.labels.insert(root, format!("root-{id}"));
        self.gadgets.push(Gadget { level: level + 1, root, cycle: cycle.clone(), hats });
        for (j, &c) in cycle.iter().enumerate() {
            path.push((id, j));
            if level + 1 < self.parts.len() {
                self.gadget(level + 1, c, path);
            } else {
                self.terminal(c, path);
            }
            path.pop();
        }
    }

    /// `X_v` collects, at every level, the hats of the cycle positions that
    /// split `C^i \ {v^i}` into `k_i` paths of `2 d_i + 1` vertices.
    fn terminal(&mut self, v: VertexId, path: &[(usize, usize)]) {
        let mut xs = Vec::new();
        for (level, &(g, pos)) in path.iter().enumerate() {
            let (ki, di) = self.parts[level];
            let gadget = &self.gadgets[g];
            let len = gadget.cycle.len();
            for t in 0..ki {
                xs.push(gadget.hats[(pos + 1 + t * (2 * di + 1) + di) % len]);
            }
        }
        self.b.labels.insert(v, format!("L-{}", self.entries.len()));
        self.entries.push((v, xs));
    }
}

/// Planar `(k, d)`-comatching from `h = min(k, d)` levels of nested cycle
/// gadgets, with `k` and `d` split evenly across levels.
pub fn gen_planar_kd(k: usize, d: usize) -> Result<LowerBoundInstance> {
    if k == 0 || d == 0 {
        return Err(Error::param(format!("k and d must be positive, got k = {k}, d = {d}")));
    }
    let size = planar_kd_size(k, d);
    if size > PLANAR_KD_ENTRY_CAP {
        return Err(Error::CapExceeded { what: "planar (k, d) entry count", limit: PLANAR_KD_ENTRY_CAP, actual: size });
    }
    let h = k.min(d);
    let parts: Vec<(usize, usize)> = split_evenly(k, h).into_iter().zip(split_evenly(d, h)).collect();
    let mut build = PlanarBuild {
        parts: parts.clone(),
        b: Builder::default(),
        gadgets: Vec::new(),
        entries: Vec::with_capacity(size),
        hats: BTreeMap::new(),
    };
    let root = build.b.vertex();
    build.gadget(0, root, &mut Vec::new());
    Ok(LowerBoundInstance {
        family: Family::PlanarKd { parts, gadgets: build.gadgets },
        graph: build.b.finish()?,
        entries: build.entries,
        k,
        d,
        hats: build.hats,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LowerBoundViolation {
    SetSize { entry: usize, size: usize },
    OwnSetTooClose { entry: usize, distance: f64 },
    OtherSetTooFar { entry: usize, other: usize, distance: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundReport {
    pub valid: bool,
    pub entries: usize,
    pub violation: Option<LowerBoundViolation>,
}

/// Exhaustive check that `entries` is a `(k, d)`-comatching in `graph`.
/// Violations are reported for the first offending entry index.
pub fn verify_lower_bound(graph: &WeightedGraph, entries: &Entries, k: usize, d: usize) -> Result<LowerBoundReport> {
    for (v, xs) in entries {
        graph.check_vertex(*v)?;
        for &x in xs {
            graph.check_vertex(x)?;
        }
    }
    let threshold = d as f64;
    let checks = par::map_range(entries.len(), |a| -> Result<Option<LowerBoundViolation>> {
        let (v, own) = &entries[a];
        if own.is_empty() || own.len() > k {
            return Ok(Some(LowerBoundViolation::SetSize { entry: a, size: own.len() }));
        }
        let row = sssp(graph, *v)?;
        let to_set = |xs: &[VertexId]| xs.iter().map(|&x| row[x]).fold(f64::INFINITY, f64::min);
        let distance = to_set(own);
        if distance <= threshold {
            return Ok(Some(LowerBoundViolation::OwnSetTooClose { entry: a, distance }));
        }
        for (b, (_, other)) in entries.iter().enumerate() {
            if b != a {
                let distance = to_set(other);
                if distance > threshold {
                    return Ok(Some(LowerBoundViolation::OtherSetTooFar { entry: a, other: b, distance }));
                }
            }
        }
        Ok(None)
    });
    let mut violation = None;
    for c in checks {
        if let Some(v) = c? {
            violation = Some(v);
            break;
        }
    }
    Ok(LowerBoundReport { valid: violation.is_none(), entries: entries.len(), violation })
}
