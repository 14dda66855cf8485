//! Seeded, planar-by-construction benchmark instances.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{sssp, PointSet, WeightedGraph};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightDist {
    Unit,
    /// Uniform real weights in `[lo, hi)`.
    Uniform(f64, f64),
    /// Uniform integer weights in `[lo, hi]`.
    Integer(u32, u32),
}

impl WeightDist {
    fn check(self) -> Result<()> {
        match self {
            WeightDist::Unit => Ok(()),
            WeightDist::Uniform(lo, hi) if lo > 0.0 && hi > lo && hi.is_finite() => Ok(()),
            WeightDist::Integer(lo, hi) if lo >= 1 && hi >= lo => Ok(()),
            other => Err(Error::param(format!("invalid weight distribution {other:?}"))),
        }
    }

    fn draw(self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            WeightDist::Unit => 1.0,
            WeightDist::Uniform(lo, hi) => rng.gen_range(lo..hi),
            WeightDist::Integer(lo, hi) => f64::from(rng.gen_range(lo..=hi)),
        }
    }
}

/// `w x h` grid with vertex `x + w y`. Edges are weighted in row-major order
/// (right edge, then down edge) from a single seeded stream.
pub fn grid(w: usize, h: usize, dist: WeightDist, seed: u64) -> Result<WeightedGraph> {
    if w == 0 || h == 0 {
        return Err(Error::param(format!("grid dimensions must be positive, got {w} x {h}")));
    }
    dist.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::with_capacity(2 * w * h);
    for y in 0..h {
        for x in 0..w {
            let v = x + w * y;
            if x + 1 < w {
                edges.push((v, v + 1, dist.draw(&mut rng)));
            }
            if y + 1 < h {
                edges.push((v, v + w, dist.draw(&mut rng)));
            }
        }
    }
    WeightedGraph::new(w * h, edges)
}

/// Replaces `rounds` random edges by two-edge paths of the same total
/// weight. New vertices are appended; labels are kept. Integer weights of at
/// least 2 are split into integers, all others at a random interior point.
pub fn random_subdivision(graph: &WeightedGraph, rounds: usize, seed: u64) -> Result<WeightedGraph> {
    if rounds == 0 {
        return Ok(graph.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut n = graph.vertex_count();
    let mut edges = graph.edges().to_vec();
    if edges.is_empty() {
        return Err(Error::param("cannot subdivide a graph without edges"));
    }
    for _ in 0..rounds {
        let i = rng.gen_range(0..edges.len());
        let (u, v, w) = edges[i];
        let a = if w.fract() == 0.0 && w >= 2.0 {
            f64::from(rng.gen_range(1..w as u32))
        } else {
            w * rng.gen_range(0.25..0.75)
        };
        let m = n;
        n += 1;
        edges[i] = (u, m, a);
        edges.push((m, v, w - a));
    }
    let out = WeightedGraph::new(n, edges)?.with_labels(graph.labels().clone())?;
    let original = graph.vertex_count();
    let mismatch = par::map_range(original, |s| -> Result<bool> {
        let before = sssp(graph, s)?;
        let after = sssp(&out, s)?;
        Ok(before.iter().zip(&after).any(|(&x, &y)| !(x == y || (x - y).abs() <= 1e-9 * x.abs().max(1.0))))
    });
    for (s, m) in mismatch.into_iter().enumerate() {
        if m? {
            return Err(Error::internal(format!("subdivision changed distances from vertex {s}")));
        }
    }
    Ok(out)
}

/// `m` distinct vertices chosen uniformly.
pub fn random_point_subset(graph: &WeightedGraph, m: usize, seed: u64) -> Result<PointSet> {
    let n = graph.vertex_count();
    if m == 0 || m > n {
        return Err(Error::param(format!("point count must lie in 1..={n}, got {m}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(sample(&mut rng, n, m).into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::DistanceOracle;

    #[test]
    fn grid_counts() {
        let g = grid(1, 1, WeightDist::Unit, 0).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (1, 0));
        let g = grid(3, 3, WeightDist::Unit, 0).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (9, 12));
        let g = grid(4, 2, WeightDist::Integer(2, 5), 3).unwrap();
        assert!(g.edges().iter().all(|&(_, _, w)| (2.0..=5.0).contains(&w) && w.fract() == 0.0));
        assert!(grid(0, 3, WeightDist::Unit, 0).is_err());
        assert!(grid(2, 2, WeightDist::Uniform(3.0, 1.0), 0).is_err());
    }

    #[test]
    fn grids_are_deterministic() {
        let a = grid(10, 10, WeightDist::Uniform(1.0, 10.0), 7).unwrap();
        let b = grid(10, 10, WeightDist::Uniform(1.0, 10.0), 7).unwrap();
        let c = grid(10, 10, WeightDist::Uniform(1.0, 10.0), 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn subdivision_preserves_distances() {
        let path = WeightedGraph::new(2, [(0, 1, 3.0)]).unwrap();
        assert_eq!(random_subdivision(&path, 0, 1).unwrap(), path);
        let one = random_subdivision(&path, 1, 1).unwrap();
        assert_eq!(one.vertex_count(), 3);
        assert_eq!(DistanceOracle::new(&one).dist(0, 1), 3.0);

        for dist in [WeightDist::Integer(1, 4), WeightDist::Uniform(0.5, 2.0)] {
            let g = grid(4, 4, dist, 11).unwrap();
            let s = random_subdivision(&g, 20, 11).unwrap();
            assert_eq!(s.vertex_count(), 36);
            let (a, b) = (DistanceOracle::new(&g), DistanceOracle::new(&s));
            for u in 0..16 {
                for v in 0..16 {
                    assert!((a.dist(u, v) - b.dist(u, v)).abs() <= 1e-9 * a.dist(u, v).max(1.0));
                }
            }
        }
    }

    #[test]
    fn point_subsets() {
        let g = grid(3, 3, WeightDist::Unit, 0).unwrap();
        assert!(random_point_subset(&g, 0, 0).is_err());
        assert!(random_point_subset(&g, 10, 0).is_err());
        assert_eq!(random_point_subset(&g, 9, 4).unwrap(), PointSet::all(9));
        let a = random_point_subset(&g, 5, 4).unwrap();
        assert_eq!(a.len(), 5);
        assert_eq!(a, random_point_subset(&g, 5, 4).unwrap());
    }
}
