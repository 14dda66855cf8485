//! Furthest-neighbor coresets: the greedy baseline, the LP-rounding
//! construction, a brute-force certifier and the dual comatching diagnostic.

use std::collections::BTreeMap;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hitting::{
    derive_seed, lp_fractional_best_effort, round_vc_with, HittingSetInstance, RoundingConfig, DEFAULT_GAMMA,
    MWU_ITERATION_CAP,
};
use crate::metric::{diameter, require_connected, DistanceOracle, PointSet, VertexId};
use crate::par;
use crate::structures::{validate_comatching, PairFamily, PairKind};
use crate::vc::{weighted_epsilon_net_sample, SetSystem};

/// Relative slack used when comparing distances derived from float weights.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

/// Sampling attempts made by [`dual_comatching_diagnostic`] before giving up.
pub const DIAGNOSTIC_ATTEMPTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoresetMethod {
    Greedy,
    Lp,
}

/// Per-bucket record of the LP pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketReport {
    pub index: usize,
    /// Number of queries in the bucket.
    pub queries: usize,
    /// Distinct sets in the hitting-set instance.
    pub sets: usize,
    /// Value of the fractional solution used for rounding.
    pub tau_star: f64,
    pub dual_bound: f64,
    pub lp_iterations: usize,
    pub lp_converged: bool,
    pub sample_size: usize,
    pub rounds: usize,
    pub fallback: bool,
    pub seed: u64,
    #[serde(rename = "X")]
    pub hitting_set: PointSet,
}

/// Settings of the LP pipeline, recorded with every result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpParams {
    pub gamma: f64,
    pub max_lp_iterations: usize,
    /// VC dimension handed to the rounder.
    pub vc_dim: usize,
    pub rounding: RoundingConfig,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoresetResult {
    pub method: CoresetMethod,
    #[serde(rename = "Q")]
    pub points: PointSet,
    pub epsilon: f64,
    pub far_point: Option<VertexId>,
    /// Queries served by the far point alone.
    pub far_queries: usize,
    pub buckets: Vec<BucketReport>,
    pub delta: f64,
    #[serde(rename = "Delta")]
    pub diameter: f64,
    pub params: Option<LpParams>,
    /// Greedy only: `(added point, witness)` in insertion order.
    pub trace: Vec<(VertexId, VertexId)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpCoresetConfig {
    pub gamma: f64,
    pub max_lp_iterations: usize,
    pub vc_dim: usize,
    pub rounding: RoundingConfig,
    /// Restricts the queries; all vertices when `None`.
    pub queries: Option<PointSet>,
}

impl Default for LpCoresetConfig {
    fn default() -> Self {
        Self {
            gamma: DEFAULT_GAMMA,
            max_lp_iterations: MWU_ITERATION_CAP,
            vc_dim: 4,
            rounding: RoundingConfig::default(),
            queries: None,
        }
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!("eps must lie in (0, 1), got {epsilon}")))
    }
}

fn query_list(oracle: &DistanceOracle<'_>, queries: Option<&PointSet>) -> Result<Vec<VertexId>> {
    match queries {
        None => Ok((0..oracle.vertex_count()).collect()),
        Some(q) => {
            for v in q.iter() {
                oracle.graph().check_vertex(v)?;
            }
            Ok(q.as_slice().to_vec())
        }
    }
}

fn check_inputs(oracle: &DistanceOracle<'_>, points: &PointSet, queries: &[VertexId]) -> Result<()> {
    for p in points.iter() {
        oracle.graph().check_vertex(p)?;
    }
    require_connected(oracle, points, queries)
}

/// Furthest point `z_v` of `points` and its distance, for each query. Ties go
/// to the smallest id.
pub(crate) fn furthest_points(
    oracle: &DistanceOracle<'_>,
    points: &PointSet,
    queries: &[VertexId],
) -> Vec<(VertexId, f64)> {
    oracle.prefetch(points.as_slice());
    let rows: Vec<&[f64]> = points.iter().map(|p| oracle.row(p)).collect();
    par::map_slice(queries, |&v| {
        let mut best = (points.as_slice()[0], f64::NEG_INFINITY);
        for (p, row) in points.iter().zip(&rows) {
            if row[v] > best.1 {
                best = (p, row[v]);
            }
        }
        best
    })
}

/// Outcome of [`verify_coreset`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoresetReport {
    pub valid: bool,
    /// `Q ⊆ P`.
    pub subset: bool,
    /// Query with the smallest ratio `max_Q / max_P`.
    pub worst_query: Option<VertexId>,
    pub worst_ratio: f64,
}

/// Brute-force check that every query has a point of `Q` at distance at least
/// `(1 - eps)` times its furthest distance to `P` (relative slack
/// [`FLOAT_TOLERANCE`]).
pub fn verify_coreset(
    oracle: &DistanceOracle<'_>,
    points: &PointSet,
    coreset: &PointSet,
    epsilon: f64,
) -> Result<CoresetReport> {
    verify_coreset_for(oracle, points, coreset, epsilon, None)
}

pub fn verify_coreset_for(
    oracle: &DistanceOracle<'_>,
    points: &PointSet,
    coreset: &PointSet,
    epsilon: f64,
    queries: Option<&PointSet>,
) -> Result<CoresetReport> {
    check_epsilon(epsilon)?;
    let queries = query_list(oracle, queries)?;
    check_inputs(oracle, points, &queries)?;
    let subset = coreset.is_subset(points);
    if coreset.is_empty() {
        return Ok(CoresetReport { valid: false, subset, worst_query: queries.first().copied(), worst_ratio: 0.0 });
    }
    for q in coreset.iter() {
        oracle.graph().check_vertex(q)?;
    }
    let far_p = furthest_points(oracle, points, &queries);
    let far_q = furthest_points(oracle, coreset, &queries);
    let mut valid = subset;
    let mut worst = (None, f64::INFINITY);
    for ((&v, &(_, dp)), &(_, dq)) in queries.iter().zip(&far_p).zip(&far_q) {
        if dq < (1.0 - epsilon) * dp * (1.0 - FLOAT_TOLERANCE) {
            valid = false;
        }
        let ratio = if dp > 0.0 { dq / dp } else { 1.0 };
        if ratio < worst.1 {
            worst = (Some(v), ratio);
        }
    }
    Ok(CoresetReport { valid, subset, worst_query: worst.0, worst_ratio: worst.1 })
}

fn require_valid(report: CoresetReport, what: &str) -> Result<()> {
    if report.valid {
        Ok(())
    } else {
        Err(Error::internal(format!(
            "{what} output failed verification at query {:?} (ratio {})",
            report.worst_query, report.worst_ratio
        )))
    }
}

/// Greedy coreset: while some query `v` (smallest id first) has no point of
/// `Q` at distance `>= (1 - eps) * dist(v, z_v)`, add `z_v`.
pub fn greedy_coreset(
    oracle: &DistanceOracle<'_>,
    points: &PointSet,
    epsilon: f64,
    queries: Option<&PointSet>,
) -> Result<CoresetResult> {
    check_epsilon(epsilon)?;
    let qs = query_list(oracle, queries)?;
    check_inputs(oracle, points, &qs)?;
    let far = furthest_points(oracle, points, &qs);
    let mut best = vec![f64::NEG_INFINITY; qs.len()];
    let mut chosen = PointSet::default();
    let mut trace = Vec::new();
    // Coverage only improves, so one ascending pass finds the same witnesses
    // as rescanning from the start after every addition.
    for idx in 0..qs.len() {
        let (z, d) = far[idx];
        if best[idx] >= (1.0 - epsilon) * d && !chosen.is_empty() {
            continue;
        }
        chosen.insert(z);
        trace.push((z, qs[idx]));
        let row = oracle.row(z);
        for (b, &v) in best.iter_mut().zip(&qs) {
            *b = b.max(row[v]);
        }
    }
    let report = verify_coreset_for(oracle, points, &chosen, epsilon, queries)?;
    require_valid(report, "greedy coreset")?;
    Ok(CoresetResult {
        method: CoresetMethod::Greedy,
        points: chosen,
        epsilon,
        far_point: None,
        far_queries: 0,
        buckets: Vec::new(),
        delta: 0.0,
        diameter: diameter(oracle, points)?,
        params: None,
        trace,
    })
}

/// Bucket `i` with `i * delta <= d < (i + 1) * delta`, evaluated in floating
/// point exactly as written.
pub(crate) fn bucket_index(d: f64, delta: f64) -> usize {
    let mut i = (d / delta).floor().max(0.0) as usize;
    while ((i + 1) as f64) * delta <= d {
        i += 1;
    }
    while i > 0 && (i as f64) * delta > d {
        i -= 1;
    }
    i
}

/// Admissible bucket range for a query with `dist(v, z_v) >= Delta / 2` that is
/// not far. The lower end is `floor(2 / eps)`. A non-far query can have
/// `dist(v, z_v)` up to `dist(v, p0) + Delta <= (1/eps + 1) Delta`, so the
/// upper end is `floor(4/eps^2 + 4/eps)`.
pub(crate) fn bucket_range(epsilon: f64) -> (usize, usize) {
    let lo = (2.0 / epsilon * (1.0 - FLOAT_TOLERANCE)).floor() as usize;
    let hi = ((4.0 / (epsilon * epsilon) + 4.0 / epsilon) * (1.0 + FLOAT_TOLERANCE)).floor() as usize;
    (lo, hi)
}

struct Plan {
    diameter: f64,
    delta: f64,
    p0: VertexId,
    far_queries: usize,
    /// bucket index -> (query, z_v)
    buckets: BTreeMap<usize, Vec<(VertexId, VertexId)>>,
}

fn plan(oracle: &DistanceOracle<'_>, points: &PointSet, epsilon: f64, qs: &[VertexId]) -> Result<Plan> {
    let diam = diameter(oracle, points)?;
    let delta = epsilon / 4.0 * diam;
    let p0 = points.as_slice()[0];
    let far = furthest_points(oracle, points, qs);
    let p0_row = oracle.row(p0);
    let (lo, hi) = bucket_range(epsilon);
    let mut far_queries = 0;
    let mut buckets: BTreeMap<usize, Vec<(VertexId, VertexId)>> = BTreeMap::new();
    for (&v, &(z, d)) in qs.iter().zip(&far) {
        let to_p0 = p0_row[v];
        if to_p0 > diam / epsilon {
            if to_p0 < (1.0 - epsilon) * d * (1.0 - FLOAT_TOLERANCE) {
                return Err(Error::internal(format!("far query {v}: dist to p0 {to_p0} below (1 - eps) * {d}")));
            }
            far_queries += 1;
            continue;
        }
        let i = bucket_index(d, delta);
        if i < lo || i > hi {
            return Err(Error::internal(format!(
                "query {v} with dist(v, z_v) = {d} fell into bucket {i} outside [{lo}, {hi}]"
            )));
        }
        buckets.entry(i).or_default().push((v, z));
    }
    Ok(Plan { diameter: diam, delta, p0, far_queries, buckets })
}

/// Sets `S_i^v = {u in P : dist(v, u) >= (i - 1) delta}` over positions in `P`.
fn bucket_sets(
    oracle: &DistanceOracle<'_>,
    points: &PointSet,
    i: usize,
    delta: f64,
    members: &[(VertexId, VertexId)],
) -> Result<Vec<FixedBitSet>> {
    let threshold = (i as f64 - 1.0) * delta;
    let rows: Vec<&[f64]> = points.iter().map(|p| oracle.row(p)).collect();
    members
        .iter()
        .map(|&(v, z)| {
            let mut s = FixedBitSet::with_capacity(points.len());
            for (pos, row) in rows.iter().enumerate() {
                if row[v] >= threshold {
                    s.insert(pos);
                }
            }
            let zpos = points.as_slice().binary_search(&z).expect("z_v is a point");
            if !s.contains(zpos) {
                return Err(Error::internal(format!("z_{v} = {z} missing from its own set in bucket {i}")));
            }
            Ok(s)
        })
        .collect()
}

/// The hitting-set instance of every nonempty bucket that [`lp_coreset`]
/// solves, keyed by bucket index. Elements are positions in `points`.
pub fn bucket_instances(
    oracle: &DistanceOracle<'_>,
    points: &PointSet,
    epsilon: f64,
) -> Result<Vec<(usize, HittingSetInstance)>> {
    check_epsilon(epsilon)?;
    let qs = query_list(oracle, None)?;
    check_inputs(oracle, points, &qs)?;
    if points.len() == 1 {
        return Ok(Vec::new());
    }
    let plan = plan(oracle, points, epsilon, &qs)?;
    if plan.diameter == 0.0 {
        return Ok(Vec::new());
    }
    plan.buckets
        .iter()
        .map(|(&i, members)| {
            let sets = bucket_sets(oracle, points, i, plan.delta, members)?;
            Ok((i, HittingSetInstance::new(SetSystem::new(points.len(), sets)?)?))
        })
        .collect()
}

/// LP-rounding coreset with default settings.
pub fn lp_coreset(oracle: &DistanceOracle<'_>, points: &PointSet, epsilon: f64, seed: u64) -> Result<CoresetResult> {
    lp_coreset_with(oracle, points, epsilon, seed, &LpCoresetConfig::default())
}

/// LP-rounding coreset: `Q = {p0} ∪ X_i` where `X_i` hits the sets
/// `S_i^v` of every nonempty distance bucket `i`.
pub fn lp_coreset_with(
    oracle: &DistanceOracle<'_>,
    points: &PointSet,
    epsilon: f64,
    seed: u64,
    config: &LpCoresetConfig,
) -> Result<CoresetResult> {
    check_epsilon(epsilon)?;
    let qs = query_list(oracle, config.queries.as_ref())?;
    check_inputs(oracle, points, &qs)?;
    let params = LpParams {
        gamma: config.gamma,
        max_lp_iterations: config.max_lp_iterations,
        vc_dim: config.vc_dim,
        rounding: config.rounding,
        seed,
    };
    let trivial = |q: PointSet, diam: f64| CoresetResult {
        method: CoresetMethod::Lp,
        points: q,
        epsilon,
        far_point: points.first(),
        far_queries: 0,
        buckets: Vec::new(),
        delta: epsilon / 4.0 * diam,
        diameter: diam,
        params: Some(params.clone()),
        trace: Vec::new(),
    };
    if points.len() == 1 {
        return Ok(trivial(points.clone(), 0.0));
    }
    let plan = plan(oracle, points, epsilon, &qs)?;
    if plan.diameter == 0.0 {
        return Ok(trivial(PointSet::from_ids([plan.p0]), 0.0));
    }
    let entries: Vec<(usize, Vec<(VertexId, VertexId)>)> = plan.buckets.into_iter().collect();
    let reports = par::map_slice(&entries, |(i, members)| -> Result<BucketReport> {
        let sets = bucket_sets(oracle, points, *i, plan.delta, members)?;
        let instance = HittingSetInstance::new(SetSystem::new(points.len(), sets)?)?;
        let frac = lp_fractional_best_effort(&instance, config.gamma, config.max_lp_iterations)?;
        let bucket_seed = derive_seed(seed, *i as u64);
        let rounding = round_vc_with(&instance, &frac, config.vc_dim, bucket_seed, &config.rounding)?;
        Ok(BucketReport {
            index: *i,
            queries: members.len(),
            sets: instance.sets().len(),
            tau_star: frac.value,
            dual_bound: frac.dual_bound,
            lp_iterations: frac.iterations,
            lp_converged: frac.converged,
            sample_size: rounding.sample_size,
            rounds: rounding.rounds,
            fallback: rounding.fallback,
            seed: bucket_seed,
            hitting_set: rounding.set.iter().map(|&pos| points.as_slice()[pos]).collect(),
        })
    });
    let buckets: Vec<BucketReport> = reports.into_iter().collect::<Result<_>>()?;
    let mut q = PointSet::from_ids([plan.p0]);
    for b in &buckets {
        q = q.union(&b.hitting_set);
    }
    let report = verify_coreset_for(oracle, points, &q, epsilon, config.queries.as_ref())?;
    require_valid(report, "LP coreset")?;
    Ok(CoresetResult {
        method: CoresetMethod::Lp,
        points: q,
        epsilon,
        far_point: Some(plan.p0),
        far_queries: plan.far_queries,
        buckets,
        delta: plan.delta,
        diameter: plan.diameter,
        params: Some(params),
        trace: Vec::new(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadiusRule {
    /// `R = i * delta`.
    BucketStart,
    /// `R` just above `max cross / (1 - eps')`, used when a diagonal distance
    /// equals `i * delta` exactly.
    CrossBound,
}

/// Result of the dual rounding diagnostic for one bucket.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualDiagnostic {
    pub bucket: usize,
    /// Value of the dual packing solution that was sampled.
    pub tau_star: f64,
    /// `floor(tau / 4)`.
    pub target: usize,
    pub attempts: usize,
    /// Largest surviving set seen.
    pub best_size: usize,
    /// The comatching, when some attempt reached the target.
    pub family: Option<PairFamily>,
    pub radius_rule: Option<RadiusRule>,
}

/// Accuracy at which a bucket-`i` comatching is certified: `eps^2 / 4`, or
/// `1 / i` for buckets above `4 / eps^2`.
pub fn diagnostic_epsilon(epsilon: f64, bucket: usize) -> f64 {
    let e = epsilon * epsilon / 4.0;
    if bucket as f64 > 4.0 / (epsilon * epsilon) {
        e.min(1.0 / bucket as f64)
    } else {
        e
    }
}

/// Samples `2K` queries of bucket `i` from the dual LP solution, discards every
/// query that threatens another (`u` threatens `v` when `z_v ∈ S_i^u`) and
/// returns `(v, z_v)` for the survivors once at least `K` remain.
pub fn dual_comatching_diagnostic(
    oracle: &DistanceOracle<'_>,
    points: &PointSet,
    epsilon: f64,
    bucket: usize,
    seed: u64,
) -> Result<DualDiagnostic> {
    check_epsilon(epsilon)?;
    let qs: Vec<VertexId> = (0..oracle.vertex_count()).collect();
    check_inputs(oracle, points, &qs)?;
    if points.len() < 2 {
        return Err(Error::param("the diagnostic needs at least two points"));
    }
    let plan = plan(oracle, points, epsilon, &qs)?;
    let Some(members) = plan.buckets.get(&bucket) else {
        return Err(Error::param(format!("bucket {bucket} is empty")));
    };
    let threshold = (bucket as f64 - 1.0) * plan.delta;
    // one representative query per distinct set, in the order SetSystem keeps
    let sets = bucket_sets(oracle, points, bucket, plan.delta, members)?;
    let mut reps: Vec<(VertexId, VertexId)> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (s, &m) in sets.iter().zip(members) {
        if seen.insert(s.clone()) {
            reps.push(m);
        }
    }
    let instance = HittingSetInstance::new(SetSystem::new(points.len(), sets)?)?;
    let frac = lp_fractional_best_effort(&instance, DEFAULT_GAMMA, MWU_ITERATION_CAP)?;
    let tau = frac.dual_bound;
    let target = (tau / 4.0).floor() as usize;
    let eps_c = diagnostic_epsilon(epsilon, bucket);
    let radius = bucket as f64 * plan.delta;
    let mut out =
        DualDiagnostic { bucket, tau_star: tau, target, attempts: 0, best_size: 0, family: None, radius_rule: None };
    if target == 0 {
        out.family = Some(PairFamily::new(PairKind::Comatching, radius, eps_c, Vec::new()));
        out.radius_rule = Some(RadiusRule::BucketStart);
        return Ok(out);
    }
    let threatens = |u: VertexId, v_z: VertexId| oracle.dist(u, v_z) >= threshold;
    for attempt in 0..DIAGNOSTIC_ATTEMPTS {
        out.attempts = attempt + 1;
        let draws = weighted_epsilon_net_sample(&frac.dual, 2 * target, derive_seed(seed, attempt as u64))?;
        let sample: Vec<(VertexId, VertexId)> = draws.iter().map(|&a| reps[a]).collect();
        let survivors: Vec<(VertexId, VertexId)> = sample
            .iter()
            .enumerate()
            .filter(|&(a, &(u, _))| !sample.iter().enumerate().any(|(b, &(_, zv))| a != b && threatens(u, zv)))
            .map(|(_, &m)| m)
            .collect();
        out.best_size = out.best_size.max(survivors.len());
        if survivors.len() < target {
            continue;
        }
        let pairs: Vec<(VertexId, VertexId)> = survivors;
        let at_bucket = PairFamily::new(PairKind::Comatching, radius, eps_c, pairs.clone());
        if validate_comatching(oracle, &at_bucket)?.valid {
            out.family = Some(at_bucket);
            out.radius_rule = Some(RadiusRule::BucketStart);
            return Ok(out);
        }
        let cross = pairs
            .iter()
            .flat_map(|&(u, _)| pairs.iter().filter(move |&&(w, _)| w != u).map(move |&(_, z)| oracle.dist(u, z)))
            .fold(0.0, f64::max);
        let mut r = cross / (1.0 - eps_c);
        while (1.0 - eps_c) * r < cross {
            r *= 1.0 + f64::EPSILON;
        }
        if r > 0.0 {
            let at_cross = PairFamily::new(PairKind::Comatching, r, eps_c, pairs);
            if validate_comatching(oracle, &at_cross)?.valid {
                out.family = Some(at_cross);
                out.radius_rule = Some(RadiusRule::CrossBound);
                return Ok(out);
            }
        }
    }
    Ok(out)
}

/// Nonempty bucket indices of the LP pipeline for these inputs.
pub fn nonempty_buckets(oracle: &DistanceOracle<'_>, points: &PointSet, epsilon: f64) -> Result<Vec<usize>> {
    check_epsilon(epsilon)?;
    let qs: Vec<VertexId> = (0..oracle.vertex_count()).collect();
    check_inputs(oracle, points, &qs)?;
    if points.len() < 2 {
        return Ok(Vec::new());
    }
    Ok(plan(oracle, points, epsilon, &qs)?.buckets.into_keys().collect())
}
