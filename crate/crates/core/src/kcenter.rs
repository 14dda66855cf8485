//! k-center coresets by exhaustive tuple enumeration, plus a brute-force
//! certifier.
//!
//! Tuples are enumerated as sets of `1..=k` distinct vertices: repeating a
//! centre never changes `dist(., X)`.

use std::collections::BTreeMap;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::coreset::{bucket_index, BucketReport, LpParams, FLOAT_TOLERANCE};
use crate::error::{Error, Result};
use crate::hitting::{
    derive_seed, lp_fractional_best_effort, round_vc_with, HittingSetInstance, RoundingConfig, DEFAULT_GAMMA,
    MWU_ITERATION_CAP,
};
use crate::metric::{require_connected, DistanceOracle, PointSet, VertexId};
use crate::par;
use crate::vc::SetSystem;

/// Largest number of centre sets [`verify_kcenter`] will enumerate.
pub const VERIFY_TUPLE_CAP: usize = 5_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct KCenterConfig {
    pub max_vertices: usize,
    pub max_k: usize,
    pub gamma: f64,
    pub max_lp_iterations: usize,
    pub rounding: RoundingConfig,
}

impl Default for KCenterConfig {
    fn default() -> Self {
        Self {
            max_vertices: 40,
            max_k: 2,
            gamma: DEFAULT_GAMMA,
            max_lp_iterations: MWU_ITERATION_CAP,
            rounding: RoundingConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KCoresetResult {
    #[serde(rename = "Q")]
    pub points: PointSet,
    pub k: usize,
    pub epsilon: f64,
    pub alpha0: Vec<VertexId>,
    #[serde(rename = "Delta")]
    pub diameter: f64,
    pub delta: f64,
    /// Centre sets outside the bucketed range, served by `alpha0`.
    pub far_tuples: usize,
    pub buckets: Vec<BucketReport>,
    pub params: Option<LpParams>,
}

/// VC dimension handed to the rounder for intersections of `k` ball
/// complements: `ceil(4 k (1 + log2(k + 1)))`.
pub fn effective_vc_dim(k: usize) -> usize {
    (4.0 * k as f64 * (1.0 + ((k + 1) as f64).log2())).ceil() as usize
}

/// All sets of `1..=k` distinct elements of `0..n`, in lexicographic order
/// within each size.
pub fn centre_sets(n: usize, k: usize) -> Vec<Vec<VertexId>> {
    fn rec(n: usize, size: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for v in start..n {
            if n - v < size - cur.len() {
                break;
            }
            cur.push(v);
            rec(n, size, v + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for size in 1..=k.min(n) {
        rec(n, size, 0, &mut Vec::new(), &mut out);
    }
    out
}

fn centre_set_count(n: usize, k: usize) -> u128 {
    let mut total = 0u128;
    let mut binom = 1u128;
    for j in 1..=k.min(n) {
        binom = binom * (n - j + 1) as u128 / j as u128;
        total += binom;
    }
    total
}

fn dist_to_centres(oracle: &DistanceOracle<'_>, p: VertexId, centres: &[VertexId]) -> f64 {
    centres.iter().map(|&c| oracle.row(c)[p]).fold(f64::INFINITY, f64::min)
}

/// Point of `points` furthest from `centres` (smallest id on ties).
fn furthest_from(oracle: &DistanceOracle<'_>, points: &PointSet, centres: &[VertexId]) -> (VertexId, f64) {
    let mut best = (points.as_slice()[0], f64::NEG_INFINITY);
    for p in points.iter() {
        let d = dist_to_centres(oracle, p, centres);
        if d > best.1 {
            best = (p, d);
        }
    }
    best
}

fn check_common(oracle: &DistanceOracle<'_>, points: &PointSet, k: usize, epsilon: f64) -> Result<()> {
    if k == 0 {
        return Err(Error::param("k must be positive"));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::param(format!("eps must lie in (0, 1), got {epsilon}")));
    }
    for p in points.iter() {
        oracle.graph().check_vertex(p)?;
    }
    let all: Vec<VertexId> = (0..oracle.vertex_count()).collect();
    require_connected(oracle, points, &all)
}

pub fn kcenter_coreset(
    oracle: &DistanceOracle<'_>,
    points: &PointSet,
    k: usize,
    epsilon: f64,
    seed: u64,
) -> Result<KCoresetResult> {
    kcenter_coreset_with(oracle, points, k, epsilon, seed, &KCenterConfig::default())
}

/// k-center coreset: `alpha0 ∪ X_i`, where `alpha0` is a greedy spread of
/// `k + 1` points and `X_i` hits the sets `S_i^alpha` of each bucket.
pub fn kcenter_coreset_with(
    oracle: &DistanceOracle<'_>,
    points: &PointSet,
    k: usize,
    epsilon: f64,
    seed: u64,
    config: &KCenterConfig,
) -> Result<KCoresetResult> {
    check_common(oracle, points, k, epsilon)?;
    let n = oracle.vertex_count();
    if points.len() <= k + 1 {
        return Ok(KCoresetResult {
            points: points.clone(),
            k,
            epsilon,
            alpha0: points.as_slice().to_vec(),
            diameter: 0.0,
            delta: 0.0,
            far_tuples: 0,
            buckets: Vec::new(),
            params: None,
        });
    }
    if k > config.max_k {
        return Err(Error::CapExceeded { what: "k-center tuple size", limit: config.max_k, actual: k });
    }
    if n > config.max_vertices {
        return Err(Error::CapExceeded { what: "k-center vertex count", limit: config.max_vertices, actual: n });
    }
    oracle.prefetch_all();

    let mut alpha0 = vec![points.as_slice()[0]];
    while alpha0.len() < k + 1 {
        alpha0.push(furthest_from(oracle, points, &alpha0).0);
    }
    let (_, diam) = furthest_from(oracle, points, &alpha0);
    if diam <= 0.0 {
        return Err(Error::internal("alpha0 covers every point at distance zero"));
    }
    for (a, &u) in alpha0.iter().enumerate() {
        for &v in &alpha0[a + 1..] {
            if oracle.dist(u, v) < diam * (1.0 - FLOAT_TOLERANCE) {
                return Err(Error::internal(format!("alpha0 points {u}, {v} closer than Delta = {diam}")));
            }
        }
    }
    let delta = epsilon / 4.0 * diam;
    let lo = (2.0 / epsilon * (1.0 - FLOAT_TOLERANCE)).floor() as usize;
    let hi = (4.0 / (epsilon * epsilon) * (1.0 + FLOAT_TOLERANCE)).floor() as usize;

    let tuples = centre_sets(n, k);
    let classified: Vec<Result<Option<(usize, VertexId)>>> = par::map_slice(&tuples, |alpha| {
        let (z, d) = furthest_from(oracle, points, alpha);
        if d > diam / epsilon {
            let via_alpha0 = alpha0.iter().map(|&v| dist_to_centres(oracle, v, alpha)).fold(0.0, f64::max);
            if via_alpha0 < (1.0 - epsilon) * d * (1.0 - FLOAT_TOLERANCE) {
                return Err(Error::internal(format!("far tuple {alpha:?} not served by alpha0")));
            }
            return Ok(None);
        }
        let i = bucket_index(d, delta);
        if i < lo || i > hi {
            return Err(Error::internal(format!("tuple {alpha:?} fell into bucket {i} outside [{lo}, {hi}]")));
        }
        Ok(Some((i, z)))
    });
    let mut far_tuples = 0;
    let mut buckets: BTreeMap<usize, Vec<(usize, VertexId)>> = BTreeMap::new();
    for (t, c) in classified.into_iter().enumerate() {
        match c? {
            None => far_tuples += 1,
            Some((i, z)) => buckets.entry(i).or_default().push((t, z)),
        }
    }

    let d_eff = effective_vc_dim(k);
    let entries: Vec<(usize, Vec<(usize, VertexId)>)> = buckets.into_iter().collect();
    let reports = par::map_slice(&entries, |(i, members)| -> Result<BucketReport> {
        let threshold = (*i as f64 - 1.0) * delta;
        let mut sets = Vec::with_capacity(members.len());
        for &(t, z) in members {
            let mut s = FixedBitSet::with_capacity(points.len());
            for (pos, p) in points.iter().enumerate() {
                if dist_to_centres(oracle, p, &tuples[t]) >= threshold {
                    s.insert(pos);
                }
            }
            let zpos = points.as_slice().binary_search(&z).expect("z is a point");
            if !s.contains(zpos) {
                return Err(Error::internal(format!("z missing from its own set in bucket {i}")));
            }
            sets.push(s);
        }
        let instance = HittingSetInstance::new(SetSystem::new(points.len(), sets)?)?;
        let frac = lp_fractional_best_effort(&instance, config.gamma, config.max_lp_iterations)?;
        let bucket_seed = derive_seed(seed, *i as u64);
        let r = round_vc_with(&instance, &frac, d_eff, bucket_seed, &config.rounding)?;
        Ok(BucketReport {
            index: *i,
            queries: members.len(),
            sets: instance.sets().len(),
            tau_star: frac.value,
            dual_bound: frac.dual_bound,
            lp_iterations: frac.iterations,
            lp_converged: frac.converged,
            sample_size: r.sample_size,
            rounds: r.rounds,
            fallback: r.fallback,
            seed: bucket_seed,
            hitting_set: r.set.iter().map(|&pos| points.as_slice()[pos]).collect(),
        })
    });
    let reports: Vec<BucketReport> = reports.into_iter().collect::<Result<_>>()?;
    let mut q = PointSet::from_ids(alpha0.iter().copied());
    for b in &reports {
        q = q.union(&b.hitting_set);
    }
    let report = verify_kcenter(oracle, points, &q, k, epsilon)?;
    if !report.valid {
        return Err(Error::internal(format!(
            "k-center coreset failed verification at {:?} (ratio {})",
            report.worst_centres, report.worst_ratio
        )));
    }
    Ok(KCoresetResult {
        points: q,
        k,
        epsilon,
        alpha0,
        diameter: diam,
        delta,
        far_tuples,
        buckets: reports,
        params: Some(LpParams {
            gamma: config.gamma,
            max_lp_iterations: config.max_lp_iterations,
            vc_dim: d_eff,
            rounding: config.rounding,
            seed,
        }),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KCenterReport {
    pub valid: bool,
    pub subset: bool,
    pub worst_centres: Option<Vec<VertexId>>,
    pub worst_ratio: f64,
    pub tuples_checked: usize,
}

/// Checks `max_Q dist(q, X) >= (1 - eps) max_P dist(p, X)` for every set `X`
/// of at most `k` vertices.
pub fn verify_kcenter(
    oracle: &DistanceOracle<'_>,
    points: &PointSet,
    coreset: &PointSet,
    k: usize,
    epsilon: f64,
) -> Result<KCenterReport> {
    check_common(oracle, points, k, epsilon)?;
    let n = oracle.vertex_count();
    let count = centre_set_count(n, k);
    if count > VERIFY_TUPLE_CAP as u128 {
        return Err(Error::CapExceeded {
            what: "k-center verification tuples",
            limit: VERIFY_TUPLE_CAP,
            actual: usize::try_from(count).unwrap_or(usize::MAX),
        });
    }
    for q in coreset.iter() {
        oracle.graph().check_vertex(q)?;
    }
    let subset = coreset.is_subset(points);
    if coreset.is_empty() {
        return Ok(KCenterReport { valid: false, subset, worst_centres: None, worst_ratio: 0.0, tuples_checked: 0 });
    }
    oracle.prefetch_all();
    let tuples = centre_sets(n, k);
    let ratios: Vec<(bool, f64)> = par::map_slice(&tuples, |x| {
        let dp = furthest_from(oracle, points, x).1;
        let dq = furthest_from(oracle, coreset, x).1;
        let ok = dq >= (1.0 - epsilon) * dp * (1.0 - FLOAT_TOLERANCE);
        (ok, if dp > 0.0 { dq / dp } else { 1.0 })
    });
    let mut valid = subset;
    let mut worst = (None, f64::INFINITY);
    for (t, &(ok, ratio)) in ratios.iter().enumerate() {
        valid &= ok;
        if ratio < worst.1 {
            worst = (Some(t), ratio);
        }
    }
    Ok(KCenterReport {
        valid,
        subset,
        worst_centres: worst.0.map(|t| tuples[t].clone()),
        worst_ratio: worst.1,
        tuples_checked: tuples.len(),
    })
}
