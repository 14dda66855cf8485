use crate::coreset::greedy_coreset;
use crate::error::{Error, Result};
use crate::metric::{require_connected, DistanceOracle, PointSet, VertexId, WeightedGraph};
use crate::par;

use super::clique::CliqueGraph;
use super::{PairFamily, PairKind};

/// Default limit on the number of far pairs in one compatibility graph.
pub const DEFAULT_COMPATIBILITY_CAP: usize = 2000;

/// Smallest `R >= c / (1 - eps)` for which `c <= (1 - eps) * R` holds in
/// floating point.
fn radius_admitting(c: f64, epsilon: f64) -> f64 {
    let mut r = c / (1.0 - epsilon);
    while (1.0 - epsilon) * r < c {
        r *= 1.0 + f64::EPSILON;
    }
    r
}

/// Radii that suffice for an exact comatching search.
///
/// A family with largest cross distance `C` and smallest diagonal distance
/// `D` admits some `R` iff `C < (1 - eps) D`, and then `R = C / (1 - eps)`
/// works. So it is enough to try `c / (1 - eps)` for every distinct positive
/// distance `c`, plus one radius below every positive distance for families
/// whose cross distances are all zero.
pub fn comatching_radius_candidates(oracle: &DistanceOracle<'_>, epsilon: f64) -> Vec<f64> {
    oracle.prefetch_all();
    let n = oracle.vertex_count();
    let mut dists: Vec<f64> = (0..n)
        .flat_map(|u| {
            let row = oracle.row(u);
            ((u + 1)..n).map(move |v| row[v])
        })
        .filter(|d| d.is_finite() && *d > 0.0)
        .collect();
    dists.sort_by(f64::total_cmp);
    dists.dedup();
    let Some(&max) = dists.last() else {
        return Vec::new();
    };
    let mut radii: Vec<f64> = std::iter::once(dists[0] / 2.0)
        .chain(dists.iter().map(|&c| radius_admitting(c, epsilon)))
        .filter(|&r| r < max)
        .collect();
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    radii
}

fn max_comatching_at(
    oracle: &DistanceOracle<'_>,
    epsilon: f64,
    radius: f64,
    cap: usize,
) -> Result<Vec<(VertexId, VertexId)>> {
    let n = oracle.vertex_count();
    let close = (1.0 - epsilon) * radius;
    let nodes: Vec<(VertexId, VertexId)> =
        (0..n).flat_map(|p| (0..n).map(move |q| (p, q))).filter(|&(p, q)| oracle.dist(p, q) > radius).collect();
    if nodes.len() > cap {
        return Err(Error::CapExceeded { what: "comatching compatibility graph", limit: cap, actual: nodes.len() });
    }
    let g = CliqueGraph::from_predicate(nodes.len(), |a, b| {
        let (pa, qa) = nodes[a];
        let (pb, qb) = nodes[b];
        oracle.dist(pa, qb) <= close && oracle.dist(pb, qa) <= close
    });
    Ok(g.max_clique().into_iter().map(|i| nodes[i]).collect())
}

/// Largest eps-comatching over the given radii (all sufficient radii when
/// `radii` is `None`), found by exact maximum-clique search per radius.
///
/// Ties between radii go to the smallest radius.
pub fn max_comatching(
    oracle: &DistanceOracle<'_>,
    epsilon: f64,
    radii: Option<&[f64]>,
    cap: usize,
) -> Result<PairFamily> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::param(format!("eps must lie in (0, 1), got {epsilon}")));
    }
    let n = oracle.vertex_count();
    if n == 0 {
        return Ok(PairFamily::new(PairKind::Comatching, 1.0, epsilon, Vec::new()));
    }
    let all: Vec<VertexId> = (0..n).collect();
    require_connected(oracle, &PointSet::all(n), &all)?;
    oracle.prefetch_all();
    let radii: Vec<f64> = match radii {
        Some(r) => {
            if let Some(bad) = r.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
                return Err(Error::param(format!("radius must be positive, got {bad}")));
            }
            r.to_vec()
        }
        None => comatching_radius_candidates(oracle, epsilon),
    };
    let results = par::map_slice(&radii, |&r| max_comatching_at(oracle, epsilon, r, cap));
    let mut best = PairFamily::new(PairKind::Comatching, radii.first().copied().unwrap_or(1.0), epsilon, Vec::new());
    for (r, res) in radii.iter().zip(results) {
        let pairs = res?;
        if pairs.len() > best.pairs.len() {
            best = PairFamily::new(PairKind::Comatching, *r, epsilon, pairs);
        }
    }
    Ok(best)
}

/// Point/witness sequence of the greedy coreset, split into buckets whose
/// witness distances lie within a factor `1 + eps/2` of each other.
///
/// Each bucket is an `(eps/2)`-semi-ladder: pairs are `(point, witness)` in
/// insertion order, with the bucket's lower end as radius. Pairs at distance
/// zero (a witness that is itself the only point) are dropped since they fit
/// no radius.
pub fn greedy_semi_ladder_trace(
    oracle: &DistanceOracle<'_>,
    points: &PointSet,
    epsilon: f64,
) -> Result<Vec<PairFamily>> {
    let result = greedy_coreset(oracle, points, epsilon, None)?;
    let trace: Vec<(VertexId, VertexId, f64)> =
        result.trace.iter().map(|&(p, w)| (p, w, oracle.dist(p, w))).filter(|&(_, _, d)| d > 0.0).collect();
    let Some(min) = trace.iter().map(|t| t.2).min_by(f64::total_cmp) else {
        return Ok(Vec::new());
    };
    let ratio = 1.0 + epsilon / 2.0;
    let base = min * (1.0 - epsilon / 4.0);
    let bucket_of = |d: f64| {
        let mut b = ((d / base).ln() / ratio.ln()).ceil().max(1.0) as i32 - 1;
        while d > base * ratio.powi(b + 1) {
            b += 1;
        }
        while b > 0 && d <= base * ratio.powi(b) {
            b -= 1;
        }
        b
    };
    let mut buckets: std::collections::BTreeMap<i32, Vec<(VertexId, VertexId)>> = Default::default();
    for &(p, w, d) in &trace {
        buckets.entry(bucket_of(d)).or_default().push((p, w));
    }
    Ok(buckets
        .into_iter()
        .map(|(b, pairs)| PairFamily::new(PairKind::SemiLadder, base * ratio.powi(b), epsilon / 2.0, pairs))
        .collect())
}

fn on_shortest_path(du: f64, w: f64, dv: f64, total: f64) -> bool {
    let len = du + w + dv;
    (len - total).abs() <= 1e-9 * total.max(1.0)
}

fn edge_on_cross_path(oracle: &DistanceOracle<'_>, family: &PairFamily, (a, b, w): (VertexId, VertexId, f64)) -> bool {
    family.pairs.iter().enumerate().any(|(i, &(p, _))| {
        let prow = oracle.row(p);
        family.pairs.iter().enumerate().any(|(j, &(_, q))| {
            if i == j {
                return false;
            }
            let total = prow[q];
            let qrow = oracle.row(q);
            on_shortest_path(prow[a], w, qrow[b], total) || on_shortest_path(prow[b], w, qrow[a], total)
        })
    })
}

/// True when every edge of the graph lies on a shortest path from some
/// `p_i` to some `q_j` with `i != j`.
pub fn cross_paths_cover_edges(oracle: &DistanceOracle<'_>, family: &PairFamily) -> bool {
    let g = oracle.graph();
    g.edges().iter().all(|&e| edge_on_cross_path(oracle, family, e))
}

/// Subgraph keeping only edges on cross shortest paths. Cross distances are
/// unchanged and diagonal distances can only grow, so a valid comatching
/// stays valid, and the result satisfies [`cross_paths_cover_edges`].
pub fn cross_path_subgraph(oracle: &DistanceOracle<'_>, family: &PairFamily) -> Result<WeightedGraph> {
    let g = oracle.graph();
    let kept: Vec<_> = g.edges().iter().copied().filter(|&e| edge_on_cross_path(oracle, family, e)).collect();
    WeightedGraph::new(g.vertex_count(), kept)
}
