//! Comatchings, ladders and their relatives.
//!
//! Every family carries the witness radius `R` and accuracy `eps`. A pair of
//! points is *far* when its distance exceeds `R` and *close* when it is at most
//! `(1 - eps) R`. The validators compare exactly; no tolerance is applied.
//!
//! Semi-ladders are checked with the orientation produced by the greedy
//! coreset trace: `dist(p_i, q_j) <= (1 - eps) R` for all `i < j`.

pub mod clique;
mod ramsey;
mod search;

pub use ramsey::{ramsey_extract, Extracted, Homogeneity, HomogenizationStep, RamseyOutcome};
pub use search::{
    comatching_radius_candidates, cross_path_subgraph, cross_paths_cover_edges, greedy_semi_ladder_trace,
    max_comatching, DEFAULT_COMPATIBILITY_CAP,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{DistanceOracle, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairKind {
    SemiLadder,
    Ladder,
    Comatching,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TripleKind {
    DoubleLadder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TupleKind {
    KComatching,
}

/// Ordered pairs `(p_i, q_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairFamily {
    pub kind: PairKind,
    #[serde(rename = "R")]
    pub radius: f64,
    #[serde(rename = "eps")]
    pub epsilon: f64,
    #[serde(rename = "items")]
    pub pairs: Vec<(VertexId, VertexId)>,
}

/// Ordered triples `(p_i, top_i, bottom_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleFamily {
    pub kind: TripleKind,
    #[serde(rename = "R")]
    pub radius: f64,
    #[serde(rename = "eps")]
    pub epsilon: f64,
    #[serde(rename = "items")]
    pub triples: Vec<Triple>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triple {
    pub p: VertexId,
    pub top: VertexId,
    pub bottom: VertexId,
}

/// Entries `(p, X)` with `|X| <= k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KTupleFamily {
    pub kind: TupleKind,
    pub k: usize,
    #[serde(rename = "R")]
    pub radius: f64,
    #[serde(rename = "eps")]
    pub epsilon: f64,
    #[serde(rename = "items")]
    pub entries: Vec<(VertexId, Vec<VertexId>)>,
}

impl PairFamily {
    pub fn new(kind: PairKind, radius: f64, epsilon: f64, pairs: Vec<(VertexId, VertexId)>) -> Self {
        Self { kind, radius, epsilon, pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.pairs.iter().flat_map(|&(p, q)| [p, q])
    }
}

impl TripleFamily {
    pub fn new(radius: f64, epsilon: f64, triples: Vec<Triple>) -> Self {
        Self { kind: TripleKind::DoubleLadder, radius, epsilon, triples }
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// The same triples viewed as a `(2, eps)`-comatching with `X_i = {top_i, bottom_i}`.
    pub fn as_k_comatching(&self) -> KTupleFamily {
        KTupleFamily::new(
            2,
            self.radius,
            self.epsilon,
            self.triples.iter().map(|t| (t.p, vec![t.top, t.bottom])).collect(),
        )
    }
}

impl KTupleFamily {
    pub fn new(k: usize, radius: f64, epsilon: f64, entries: Vec<(VertexId, Vec<VertexId>)>) -> Self {
        Self { kind: TupleKind::KComatching, k, radius, epsilon, entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Which side of the threshold a distance was required to be on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Requirement {
    /// `observed > bound`
    Far,
    /// `observed <= bound`
    Close,
}

/// First violated condition; `i` indexes the `p` side and `j` the partner side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub i: usize,
    pub j: usize,
    pub observed: f64,
    pub bound: f64,
    pub requirement: Requirement,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub violation: Option<Violation>,
}

impl ValidationReport {
    fn from_first(violation: Option<Violation>) -> Self {
        Self { valid: violation.is_none(), violation }
    }
}

fn check_params(radius: f64, epsilon: f64) -> Result<()> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::param(format!("radius must be positive, got {radius}")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::param(format!("eps must lie in (0, 1), got {epsilon}")));
    }
    Ok(())
}

fn check_ids(oracle: &DistanceOracle<'_>, ids: impl Iterator<Item = VertexId>) -> Result<()> {
    let g = oracle.graph();
    for v in ids {
        g.check_vertex(v)?;
    }
    Ok(())
}

/// Threshold tests shared by every validator.
struct Thresholds {
    far: f64,
    close: f64,
}

impl Thresholds {
    fn new(radius: f64, epsilon: f64) -> Self {
        Self { far: radius, close: (1.0 - epsilon) * radius }
    }

    fn far(&self, i: usize, j: usize, d: f64) -> Option<Violation> {
        (d <= self.far).then_some(Violation { i, j, observed: d, bound: self.far, requirement: Requirement::Far })
    }

    fn close(&self, i: usize, j: usize, d: f64) -> Option<Violation> {
        (d > self.close).then_some(Violation { i, j, observed: d, bound: self.close, requirement: Requirement::Close })
    }
}

/// Pair-family check driven by a rule on the index pair `(i, j)`.
fn validate_pairs_with<F>(
    oracle: &DistanceOracle<'_>,
    family: &PairFamily,
    th: &Thresholds,
    rule: F,
) -> Result<ValidationReport>
where
    F: Fn(usize, usize) -> Option<Requirement>,
{
    check_ids(oracle, family.vertices())?;
    let ps: Vec<VertexId> = family.pairs.iter().map(|&(p, _)| p).collect();
    oracle.prefetch(&ps);
    for (i, &(p, _)) in family.pairs.iter().enumerate() {
        let row = oracle.row(p);
        for (j, &(_, q)) in family.pairs.iter().enumerate() {
            let d = row[q];
            let v = match rule(i, j) {
                Some(Requirement::Far) => th.far(i, j, d),
                Some(Requirement::Close) => th.close(i, j, d),
                None => None,
            };
            if v.is_some() {
                return Ok(ValidationReport::from_first(v));
            }
        }
    }
    Ok(ValidationReport::from_first(None))
}

/// `dist(p_i, q_i) > R` for all `i`, `dist(p_i, q_j) <= (1 - eps) R` for `i != j`.
pub fn validate_comatching(oracle: &DistanceOracle<'_>, family: &PairFamily) -> Result<ValidationReport> {
    check_params(family.radius, family.epsilon)?;
    let th = Thresholds::new(family.radius, family.epsilon);
    validate_pairs_with(oracle, family, &th, |i, j| Some(if i == j { Requirement::Far } else { Requirement::Close }))
}

/// `dist(p_i, q_i) > R` for all `i`, `dist(p_i, q_j) <= (1 - eps) R` for `i < j`.
pub fn validate_semi_ladder(oracle: &DistanceOracle<'_>, family: &PairFamily) -> Result<ValidationReport> {
    check_params(family.radius, family.epsilon)?;
    let th = Thresholds::new(family.radius, family.epsilon);
    validate_pairs_with(oracle, family, &th, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Equal => Some(Requirement::Far),
        std::cmp::Ordering::Less => Some(Requirement::Close),
        std::cmp::Ordering::Greater => None,
    })
}

/// `dist(p_i, q_j) <= (1 - eps) R` if `i < j`, and `> R` otherwise.
pub fn validate_ladder(oracle: &DistanceOracle<'_>, family: &PairFamily) -> Result<ValidationReport> {
    check_params(family.radius, family.epsilon)?;
    let th = Thresholds::new(family.radius, family.epsilon);
    validate_pairs_with(oracle, family, &th, |i, j| Some(if i < j { Requirement::Close } else { Requirement::Far }))
}

/// Integer-threshold comatching: diagonal distances exceed `d`, all cross
/// distances are at most `d`.
pub fn validate_d_comatching(
    oracle: &DistanceOracle<'_>,
    pairs: &[(VertexId, VertexId)],
    d: u64,
) -> Result<ValidationReport> {
    if d == 0 {
        return Err(Error::param("d must be positive"));
    }
    let th = Thresholds { far: d as f64, close: d as f64 };
    let family = PairFamily::new(PairKind::Comatching, d as f64, 0.5, pairs.to_vec());
    validate_pairs_with(oracle, &family, &th, |i, j| Some(if i == j { Requirement::Far } else { Requirement::Close }))
}

/// Checks both conditions of a double ladder.
///
/// For `i <= j`: `dist(p_j, top_i) > R` and `dist(p_i, bottom_j) > R`.
/// For `i < j`: `dist(p_i, top_j) <= (1 - eps) R` and `dist(p_j, bottom_i) <= (1 - eps) R`.
///
/// In a reported violation `i` is the index of the `p` point and `j` the index
/// of the triple owning the top/bottom point.
pub fn validate_double_ladder(oracle: &DistanceOracle<'_>, family: &TripleFamily) -> Result<ValidationReport> {
    check_params(family.radius, family.epsilon)?;
    check_ids(oracle, family.triples.iter().flat_map(|t| [t.p, t.top, t.bottom]))?;
    let th = Thresholds::new(family.radius, family.epsilon);
    let ps: Vec<VertexId> = family.triples.iter().map(|t| t.p).collect();
    oracle.prefetch(&ps);
    let ts = &family.triples;
    for a in 0..ts.len() {
        let row = oracle.row(ts[a].p);
        for b in 0..ts.len() {
            // p_a against top_b: far when b <= a, close when a < b
            let d = row[ts[b].top];
            let v = if b <= a { th.far(a, b, d) } else { th.close(a, b, d) };
            if v.is_some() {
                return Ok(ValidationReport::from_first(v));
            }
            // p_a against bottom_b: far when a <= b, close when b < a
            let d = row[ts[b].bottom];
            let v = if a <= b { th.far(a, b, d) } else { th.close(a, b, d) };
            if v.is_some() {
                return Ok(ValidationReport::from_first(v));
            }
        }
    }
    Ok(ValidationReport::from_first(None))
}

/// `dist(p, X) > R` for every entry and `dist(p_a, X_b) <= (1 - eps) R` for `a != b`.
pub fn validate_k_comatching(oracle: &DistanceOracle<'_>, family: &KTupleFamily) -> Result<ValidationReport> {
    check_params(family.radius, family.epsilon)?;
    if family.k == 0 {
        return Err(Error::param("k must be positive"));
    }
    for (idx, (p, xs)) in family.entries.iter().enumerate() {
        if xs.is_empty() || xs.len() > family.k {
            return Err(Error::param(format!("entry {idx} has |X| = {}, expected 1..={}", xs.len(), family.k)));
        }
        check_ids(oracle, std::iter::once(*p).chain(xs.iter().copied()))?;
    }
    let th = Thresholds::new(family.radius, family.epsilon);
    Ok(ValidationReport::from_first(k_comatching_violation(oracle, &family.entries, &th)))
}

fn k_comatching_violation(
    oracle: &DistanceOracle<'_>,
    entries: &[(VertexId, Vec<VertexId>)],
    th: &Thresholds,
) -> Option<Violation> {
    let ps: Vec<VertexId> = entries.iter().map(|(p, _)| *p).collect();
    oracle.prefetch(&ps);
    for (a, (p, _)) in entries.iter().enumerate() {
        for (b, (_, xs)) in entries.iter().enumerate() {
            let d = oracle.dist_to_slice(*p, xs);
            let v = if a == b { th.far(a, b, d) } else { th.close(a, b, d) };
            if v.is_some() {
                return v;
            }
        }
    }
    None
}

/// Integer-threshold `(k, d)`-comatching check: `dist(p, X_p) > d` and
/// `dist(p, X_q) <= d` for distinct entries.
pub fn validate_kd_comatching(
    oracle: &DistanceOracle<'_>,
    entries: &[(VertexId, Vec<VertexId>)],
    d: u64,
) -> Result<ValidationReport> {
    for (p, xs) in entries {
        check_ids(oracle, std::iter::once(*p).chain(xs.iter().copied()))?;
        if xs.is_empty() {
            return Err(Error::param("entry with empty X"));
        }
    }
    let th = Thresholds { far: d as f64, close: d as f64 };
    Ok(ValidationReport::from_first(k_comatching_violation(oracle, entries, &th)))
}
