//! Instance files: `{"n", "edges", "points", "labels", "entries", "k", "d", "meta"}`.
//!
//! `edges` is a list of `[u, v, w]`; `points` defaults to every vertex;
//! `entries` (a list of `[v, [x, ...]]`) is present for comatching families.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::lowerbound::{Entries, LowerBoundInstance};
use crate::metric::{PointSet, VertexId, WeightedGraph};

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub graph: WeightedGraph,
    pub points: Option<PointSet>,
    pub entries: Option<Entries>,
    pub k: Option<usize>,
    pub d: Option<usize>,
    pub meta: Map<String, Value>,
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    n: usize,
    edges: Vec<(VertexId, VertexId, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    points: Option<Vec<VertexId>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    labels: BTreeMap<VertexId, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    entries: Option<Entries>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    d: Option<usize>,
    #[serde(default)]
    meta: Map<String, Value>,
}

impl Instance {
    pub fn new(graph: WeightedGraph) -> Self {
        Self { graph, points: None, entries: None, k: None, d: None, meta: Map::new() }
    }

    pub fn with_points(mut self, points: PointSet) -> Self {
        self.points = Some(points);
        self
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.meta.insert(key.to_string(), value.into());
        self
    }

    /// The point set, or every vertex when none was given.
    pub fn point_set(&self) -> PointSet {
        self.points.clone().unwrap_or_else(|| PointSet::all(self.graph.vertex_count()))
    }

    pub fn to_json(&self) -> Result<String> {
        let file = InstanceFile {
            n: self.graph.vertex_count(),
            edges: self.graph.edges().to_vec(),
            points: self.points.clone().map(Vec::from),
            labels: self.graph.labels().clone(),
            entries: self.entries.clone(),
            k: self.k,
            d: self.d,
            meta: self.meta.clone(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)?;
        let graph = WeightedGraph::new(file.n, file.edges)?.with_labels(file.labels)?;
        let points = file.points.map(|p| PointSet::new(p, file.n)).transpose()?;
        if points.as_ref().is_some_and(PointSet::is_empty) {
            return Err(Error::EmptyPointSet);
        }
        if let Some(entries) = &file.entries {
            for (v, xs) in entries {
                graph.check_vertex(*v)?;
                for &x in xs {
                    graph.check_vertex(x)?;
                }
            }
        }
        Ok(Self { graph, points, entries: file.entries, k: file.k, d: file.d, meta: file.meta })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Format(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")
            .map_err(|e| Error::Format(format!("cannot write {}: {e}", path.display())))
    }
}

impl From<LowerBoundInstance> for Instance {
    fn from(lb: LowerBoundInstance) -> Self {
        let mut meta = Map::new();
        if let Ok(Value::Object(family)) = serde_json::to_value(&lb.family) {
            meta.extend(family);
        }
        Self { graph: lb.graph, points: None, entries: Some(lb.entries), k: Some(lb.k), d: Some(lb.d), meta }
    }
}
