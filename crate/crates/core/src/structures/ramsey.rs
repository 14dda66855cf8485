//! Extraction of a comatching or a double ladder from a `(k, eps)`-comatching.
//!
//! Each `X_j` is read as a tuple `(q_j^1, ..., q_j^k)` (short sets are padded
//! by repeating their last point). For every coordinate `i` four graphs on the
//! index set are built, for `a < b`:
//!
//! * `H_i^->`:  `dist(p_a, q_b^i) <= (1 - eps) R`
//! * `H_i^<-`:  `dist(p_b, q_a^i) <= (1 - eps) R`
//! * `Hbar_i^->`, `Hbar_i^<-`: the same tests against `(1 - eps/2) R`
//!
//! The index set is shrunk until it is homogeneous (a clique or an independent
//! set) in all `4k` graphs, using exact maximum cliques and independent sets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{DistanceOracle, VertexId};

use super::clique::CliqueGraph;
use super::{
    validate_comatching, validate_double_ladder, validate_k_comatching, KTupleFamily, PairFamily, PairKind, Triple,
    TripleFamily,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Extracted {
    Comatching(PairFamily),
    DoubleLadder(TripleFamily),
}

impl Extracted {
    pub fn len(&self) -> usize {
        match self {
            Extracted::Comatching(f) => f.len(),
            Extracted::DoubleLadder(f) => f.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Homogeneity {
    Clique,
    Independent,
}

/// One shrinking step: which graph was homogenised and the surviving size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogenizationStep {
    pub graph: String,
    pub result: Homogeneity,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RamseyOutcome {
    pub structure: Extracted,
    /// Surviving indices into the input entries, ascending.
    pub index_set: Vec<usize>,
    pub trace: Vec<HomogenizationStep>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Direction {
    Forward,
    Backward,
}

struct Graphs<'a> {
    oracle: &'a DistanceOracle<'a>,
    ps: Vec<VertexId>,
    qs: Vec<Vec<VertexId>>,
    radius: f64,
    epsilon: f64,
}

impl Graphs<'_> {
    fn threshold(&self, relaxed: bool) -> f64 {
        if relaxed {
            (1.0 - self.epsilon / 2.0) * self.radius
        } else {
            (1.0 - self.epsilon) * self.radius
        }
    }

    /// Edge test for `a < b`.
    fn edge(&self, i: usize, dir: Direction, relaxed: bool, a: usize, b: usize) -> bool {
        let d = match dir {
            Direction::Forward => self.oracle.dist(self.ps[a], self.qs[b][i]),
            Direction::Backward => self.oracle.dist(self.ps[b], self.qs[a][i]),
        };
        d <= self.threshold(relaxed)
    }

    fn induced(&self, i: usize, dir: Direction, relaxed: bool, index: &[usize]) -> CliqueGraph {
        CliqueGraph::from_predicate(index.len(), |x, y| self.edge(i, dir, relaxed, index[x], index[y]))
    }
}

fn graph_name(i: usize, dir: Direction, relaxed: bool) -> String {
    let arrow = if dir == Direction::Forward { "->" } else { "<-" };
    let h = if relaxed { "Hbar" } else { "H" };
    format!("{h}_{}^{arrow}", i + 1)
}

/// Extracts an `(eps/2)`-comatching or an `(eps/2)`-double ladder from a valid
/// `(k, eps)`-comatching.
///
/// If some coordinate `i` (smallest first) has both relaxed graphs complete on
/// the homogeneous set, the result is the comatching `(p_j, q_j^i)` with the
/// input radius. Otherwise the smallest `i->` and `i<-` whose strict graphs are
/// complete give the double ladder with top `q^{i->}`, bottom `q^{i<-}` and
/// radius `(1 - eps/2) R`.
pub fn ramsey_extract(oracle: &DistanceOracle<'_>, family: &KTupleFamily) -> Result<RamseyOutcome> {
    let report = validate_k_comatching(oracle, family)?;
    if !report.valid {
        return Err(Error::param(format!("input is not a valid (k, eps)-comatching: {:?}", report.violation)));
    }
    let k = family.k;
    let g = Graphs {
        oracle,
        ps: family.entries.iter().map(|(p, _)| *p).collect(),
        qs: family
            .entries
            .iter()
            .map(|(_, xs)| {
                let mut t = xs.clone();
                t.resize(k, *xs.last().expect("validated entries are nonempty"));
                t
            })
            .collect(),
        radius: family.radius,
        epsilon: family.epsilon,
    };
    oracle.prefetch(&g.ps);

    let mut index: Vec<usize> = (0..family.len()).collect();
    let mut trace = Vec::new();
    for i in 0..k {
        for relaxed in [false, true] {
            for dir in [Direction::Forward, Direction::Backward] {
                let h = g.induced(i, dir, relaxed, &index);
                let clique = h.max_clique();
                let independent = h.max_independent_set();
                let (kept, result) = if clique.len() >= independent.len() {
                    (clique, Homogeneity::Clique)
                } else {
                    (independent, Homogeneity::Independent)
                };
                index = kept.into_iter().map(|x| index[x]).collect();
                trace.push(HomogenizationStep { graph: graph_name(i, dir, relaxed), result, size: index.len() });
            }
        }
    }
    if index.len() <= 1 {
        let trace_json = serde_json::to_string(&trace)?;
        return Err(Error::Extraction(format!("homogeneous index set has size {}; trace: {trace_json}", index.len())));
    }
    // Later steps only shrink I, so re-test completeness on the final set.
    let complete = |i: usize, dir: Direction, relaxed: bool| {
        g.induced(i, dir, relaxed, &index).is_clique(&(0..index.len()).collect::<Vec<_>>())
    };

    let structure = if let Some(i) =
        (0..k).find(|&i| complete(i, Direction::Forward, true) && complete(i, Direction::Backward, true))
    {
        let pairs = index.iter().map(|&j| (g.ps[j], g.qs[j][i])).collect();
        let f = PairFamily::new(PairKind::Comatching, family.radius, family.epsilon / 2.0, pairs);
        let r = validate_comatching(oracle, &f)?;
        if !r.valid {
            return Err(Error::Extraction(format!("comatching case failed validation: {:?}", r.violation)));
        }
        Extracted::Comatching(f)
    } else {
        let fwd = (0..k).find(|&i| complete(i, Direction::Forward, false));
        let bwd = (0..k).find(|&i| complete(i, Direction::Backward, false));
        let (Some(fwd), Some(bwd)) = (fwd, bwd) else {
            return Err(Error::internal("homogeneous set has no complete forward or backward graph"));
        };
        let triples = index.iter().map(|&j| Triple { p: g.ps[j], top: g.qs[j][fwd], bottom: g.qs[j][bwd] }).collect();
        let f = TripleFamily::new((1.0 - family.epsilon / 2.0) * family.radius, family.epsilon / 2.0, triples);
        let r = validate_double_ladder(oracle, &f)?;
        if !r.valid {
            return Err(Error::Extraction(format!("double-ladder case failed validation: {:?}", r.violation)));
        }
        Extracted::DoubleLadder(f)
    };
    Ok(RamseyOutcome { structure, index_set: index, trace })
}
