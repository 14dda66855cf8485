//! Set systems, shattering, Sauer–Shelah counts and weighted net sampling.

use std::collections::HashSet;

use fixedbitset::FixedBitSet;
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{DistanceOracle, PointSet, VertexId};
use crate::par;

/// Largest universe `vc_dim_at_most` accepts by default.
pub const DEFAULT_VC_UNIVERSE_CAP: usize = 30;

/// Family of subsets of `0..universe_size`, deduplicated on construction
/// (first occurrence wins).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetSystem {
    universe_size: usize,
    sets: Vec<FixedBitSet>,
    labels: Option<Vec<String>>,
}

impl SetSystem {
    pub fn new(universe_size: usize, sets: impl IntoIterator<Item = FixedBitSet>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut kept = Vec::new();
        for (idx, s) in sets.into_iter().enumerate() {
            if s.len() != universe_size {
                return Err(Error::param(format!("set {idx} has length {}, universe has {universe_size}", s.len())));
            }
            if seen.insert(s.clone()) {
                kept.push(s);
            }
        }
        Ok(Self { universe_size, sets: kept, labels: None })
    }

    /// Builds sets from element lists.
    pub fn from_lists<I, S>(universe_size: usize, lists: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: IntoIterator<Item = usize>,
    {
        let mut sets = Vec::new();
        for list in lists {
            let mut b = FixedBitSet::with_capacity(universe_size);
            for e in list {
                if e >= universe_size {
                    return Err(Error::param(format!("element {e} outside universe of size {universe_size}")));
                }
                b.insert(e);
            }
            sets.push(b);
        }
        Self::new(universe_size, sets)
    }

    /// Attaches one label per (deduplicated) set.
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.sets.len() {
            return Err(Error::param(format!("{} labels for {} sets", labels.len(), self.sets.len())));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn universe_size(&self) -> usize {
        self.universe_size
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn sets(&self) -> &[FixedBitSet] {
        &self.sets
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Distinct traces `A ∩ X` over the family.
    pub fn trace_count(&self, x: &[usize]) -> usize {
        self.sets.iter().map(|s| x.iter().map(|&e| s.contains(e)).collect::<Vec<bool>>()).collect::<HashSet<_>>().len()
    }

    /// Bit-matrix view for debugging dumps.
    pub fn to_json(&self) -> serde_json::Value {
        let dump = SetSystemDump {
            universe_size: self.universe_size,
            sets: self
                .sets
                .iter()
                .map(|s| (0..self.universe_size).map(|e| u8::from(s.contains(e))).collect())
                .collect(),
            labels: self.labels.clone(),
        };
        serde_json::to_value(dump).expect("plain data serializes")
    }
}

#[derive(Serialize, Deserialize)]
struct SetSystemDump {
    universe_size: usize,
    sets: Vec<Vec<u8>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

/// Ball system restricted to `ground`: the universe is `0..ground.len()`,
/// indexed by position in `ground`, and there is one set `B(v, r) ∩ ground` for
/// every vertex `v` and every distance `r` from `v` to a ground point.
pub fn ball_system(oracle: &DistanceOracle<'_>, ground: &PointSet) -> Result<SetSystem> {
    if ground.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    for v in ground.iter() {
        oracle.graph().check_vertex(v)?;
    }
    let n = oracle.vertex_count();
    let m = ground.len();
    let gs = ground.as_slice();
    let per_vertex: Vec<Vec<FixedBitSet>> = par::map_range(n, |v| {
        let row = oracle.row(v);
        let mut order: Vec<usize> = (0..m).filter(|&i| row[gs[i]].is_finite()).collect();
        order.sort_by(|&a, &b| row[gs[a]].total_cmp(&row[gs[b]]));
        let mut balls = Vec::new();
        let mut current = FixedBitSet::with_capacity(m);
        for (pos, &i) in order.iter().enumerate() {
            current.insert(i);
            let last_at_radius = order.get(pos + 1).is_none_or(|&nxt| row[gs[nxt]] != row[gs[i]]);
            if last_at_radius {
                balls.push(current.clone());
            }
        }
        balls
    });
    SetSystem::new(m, per_vertex.into_iter().flatten())
}

fn masks(system: &SetSystem) -> Vec<u64> {
    system.sets.iter().map(|s| s.ones().fold(0u64, |acc, e| acc | 1 << e)).collect()
}

/// Packs the bits of `mask` selected by `x` into the low `x.len()` bits.
fn compress(mask: u64, x: &[usize]) -> usize {
    x.iter().enumerate().fold(0, |acc, (i, &e)| acc | (((mask >> e) & 1) as usize) << i)
}

fn shatters_masks(masks: &[u64], x: &[usize]) -> bool {
    let need = 1usize << x.len();
    if masks.len() < need {
        return false;
    }
    let mut seen = vec![false; need];
    let mut count = 0;
    for &m in masks {
        let t = compress(m, x);
        if !seen[t] {
            seen[t] = true;
            count += 1;
            if count == need {
                return true;
            }
        }
    }
    false
}

/// True iff every subset of `x` is a trace of the family. The empty set is
/// shattered by any nonempty family.
pub fn shatters(system: &SetSystem, x: &[usize]) -> Result<bool> {
    if let Some(&e) = x.iter().find(|&&e| e >= system.universe_size) {
        return Err(Error::param(format!("element {e} outside universe")));
    }
    let mut sorted = x.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() >= usize::BITS as usize - 1 || system.len() < 1usize << sorted.len() {
        return Ok(false);
    }
    let traces: HashSet<Vec<bool>> =
        system.sets.iter().map(|s| sorted.iter().map(|&e| s.contains(e)).collect()).collect();
    Ok(traces.len() == 1usize << sorted.len())
}

/// Exhaustive check that no `(d + 1)`-subset is shattered, for universes up to
/// `DEFAULT_VC_UNIVERSE_CAP`.
pub fn vc_dim_at_most(system: &SetSystem, d: usize) -> Result<bool> {
    vc_dim_at_most_capped(system, d, DEFAULT_VC_UNIVERSE_CAP)
}

pub fn vc_dim_at_most_capped(system: &SetSystem, d: usize, cap: usize) -> Result<bool> {
    let n = system.universe_size;
    if n > cap.min(64) {
        return Err(Error::CapExceeded { what: "VC-dimension universe", limit: cap.min(64), actual: n });
    }
    let target = d + 1;
    if target > n {
        return Ok(true);
    }
    let ms = masks(system);
    // Shattering is hereditary, so only shattered prefixes are extended.
    fn extend(ms: &[u64], n: usize, target: usize, x: &mut Vec<usize>) -> bool {
        if x.len() == target {
            return true;
        }
        let start = x.last().map_or(0, |&l| l + 1);
        for e in start..n {
            if n - e < target - x.len() {
                break;
            }
            x.push(e);
            if shatters_masks(ms, x) && extend(ms, n, target, x) {
                return true;
            }
            x.pop();
        }
        false
    }
    let firsts: Vec<usize> = (0..n).collect();
    let found = par::map_slice(&firsts, |&e| {
        let mut x = vec![e];
        shatters_masks(&ms, &x) && extend(&ms, n, target, &mut x)
    });
    Ok(!found.into_iter().any(|f| f))
}

/// `sum_{i=0}^{d} C(n, i)`, saturating at `u128::MAX`.
pub fn sauer_shelah(n: u64, d: u64) -> u128 {
    let mut total: u128 = 0;
    let mut binom: u128 = 1;
    for i in 0..=d.min(n) {
        if i > 0 {
            binom = binom.saturating_mul((n - i + 1) as u128) / i as u128;
        }
        total = total.saturating_add(binom);
    }
    total
}

/// `m` i.i.d. draws from the distribution proportional to `weights`.
pub fn weighted_epsilon_net_sample(weights: &[f64], m: usize, seed: u64) -> Result<Vec<usize>> {
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(Error::param(format!("weights must be finite and nonnegative, got {w}")));
    }
    let dist = WeightedIndex::new(weights).map_err(|e| Error::param(format!("invalid sampling distribution: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..m).map(|_| dist.sample(&mut rng)).collect())
}

/// Maps universe positions of a ball system back to vertex ids.
pub fn universe_to_vertices(ground: &PointSet, elements: &[usize]) -> Vec<VertexId> {
    elements.iter().map(|&i| ground.as_slice()[i]).collect()
}
