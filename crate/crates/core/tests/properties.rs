//! Property tests for the library invariants, each against an independently
//! coded oracle where one exists.

use planar_coreset::coreset::{greedy_coreset, lp_coreset, verify_coreset};
use planar_coreset::generators::{grid, random_point_subset, random_subdivision, WeightDist};
use planar_coreset::hitting::{
    greedy_hitting_set, lp_fractional, round_vc, verify_hitting, HittingSetInstance, DEFAULT_GAMMA,
};
use planar_coreset::io::Instance;
use planar_coreset::kcenter::{kcenter_coreset, verify_kcenter};
use planar_coreset::metric::{furthest_neighbor, sssp, DistanceOracle, PointSet, WeightedGraph};
use planar_coreset::structures::{
    cross_path_subgraph, cross_paths_cover_edges, max_comatching, ramsey_extract, validate_comatching,
    validate_double_ladder, validate_k_comatching, validate_ladder, validate_semi_ladder, Extracted, KTupleFamily,
    PairFamily, PairKind, Triple, TripleFamily, DEFAULT_COMPATIBILITY_CAP,
};
use planar_coreset::vc::{ball_system, sauer_shelah, vc_dim_at_most};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_graph(rng: &mut ChaCha8Rng, n: usize, integer: bool) -> (Vec<(usize, usize, f64)>, WeightedGraph) {
    let weight = |rng: &mut ChaCha8Rng| if integer { rng.gen_range(1..=9) as f64 } else { rng.gen_range(0.1..9.0) };
    let mut edges: Vec<_> = (1..n).map(|v| (rng.gen_range(0..v), v, weight(rng))).collect();
    for _ in 0..n {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u != v {
            edges.push((u, v, weight(rng)));
        }
    }
    let g = WeightedGraph::new(n, edges.clone()).unwrap();
    (edges, g)
}

/// All-pairs distances by Floyd-Warshall, independent of the Dijkstra code.
fn floyd_warshall(n: usize, edges: &[(usize, usize, f64)]) -> Vec<Vec<f64>> {
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (v, row) in d.iter_mut().enumerate() {
        row[v] = 0.0;
    }
    for &(u, v, w) in edges {
        d[u][v] = d[u][v].min(w);
        d[v][u] = d[v][u].min(w);
    }
    for m in 0..n {
        for a in 0..n {
            for b in 0..n {
                let via = d[a][m] + d[m][b];
                if via < d[a][b] {
                    d[a][b] = via;
                }
            }
        }
    }
    d
}

fn bellman_ford(n: usize, edges: &[(usize, usize, f64)], s: usize) -> Vec<f64> {
    let mut d = vec![f64::INFINITY; n];
    d[s] = 0.0;
    for _ in 0..n {
        for &(u, v, w) in edges {
            if d[u] + w < d[v] {
                d[v] = d[u] + w;
            }
            if d[v] + w < d[u] {
                d[u] = d[v] + w;
            }
        }
    }
    d
}

/// Definitional pair-family check: `far(i, j)` / `close(i, j)` say which
/// index pairs must be far or close.
fn pair_family_ok(d: &[Vec<f64>], f: &PairFamily, rule: impl Fn(usize, usize) -> Option<bool>) -> bool {
    let close = (1.0 - f.epsilon) * f.radius;
    f.pairs.iter().enumerate().all(|(i, &(p, _))| {
        f.pairs.iter().enumerate().all(|(j, &(_, q))| match rule(i, j) {
            Some(true) => d[p][q] > f.radius,
            Some(false) => d[p][q] <= close,
            None => true,
        })
    })
}

fn random_pair_family(rng: &mut ChaCha8Rng, n: usize, d: &[Vec<f64>], kind: PairKind) -> PairFamily {
    let len = rng.gen_range(1..=4);
    let pairs: Vec<_> = (0..len).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect();
    let dists: Vec<f64> = pairs.iter().map(|&(p, q)| d[p][q]).filter(|&x| x > 0.0).collect();
    let radius = if dists.is_empty() { 1.0 } else { dists[rng.gen_range(0..dists.len())] * rng.gen_range(0.5..1.0) };
    PairFamily::new(kind, radius, rng.gen_range(0.05..0.6), pairs)
}

/// Double ladder on shuffled ids: close pairs at 2, everything else far.
fn hand_double_ladder(m: usize, rng: &mut ChaCha8Rng) -> (WeightedGraph, Vec<Triple>) {
    use rand::seq::SliceRandom;
    let mut ids: Vec<usize> = (0..3 * m).collect();
    ids.shuffle(rng);
    let mut edges = Vec::new();
    for i in 0..m {
        for j in (i + 1)..m {
            edges.push((ids[3 * i], ids[3 * j + 1], 2.0));
            edges.push((ids[3 * j], ids[3 * i + 2], 2.0));
        }
        if i + 1 < m {
            edges.push((ids[3 * i], ids[3 * i + 3], 10.0));
        }
        edges.push((ids[3 * i], ids[3 * i + 1], 10.0));
        edges.push((ids[3 * i], ids[3 * i + 2], 10.0));
    }
    let triples = (0..m).map(|i| Triple { p: ids[3 * i], top: ids[3 * i + 1], bottom: ids[3 * i + 2] }).collect();
    (WeightedGraph::new(3 * m, edges).unwrap(), triples)
}

fn weight_dist(choice: u8) -> WeightDist {
    match choice % 3 {
        0 => WeightDist::Unit,
        1 => WeightDist::Integer(1, 6),
        _ => WeightDist::Uniform(0.5, 5.0),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metric_axioms_and_independent_distances(seed in any::<u64>(), n in 1usize..=30, integer in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (edges, g) = random_graph(&mut rng, n, integer);
        let m = DistanceOracle::new(&g).all_pairs();
        let fw = floyd_warshall(n, &edges);
        for u in 0..n {
            prop_assert_eq!(m[u][u], 0.0);
            let bf = bellman_ford(n, &edges, u);
            for v in 0..n {
                if integer {
                    prop_assert_eq!(m[u][v], m[v][u]);
                    prop_assert_eq!(m[u][v], bf[v]);
                    prop_assert_eq!(m[u][v], fw[u][v]);
                } else {
                    prop_assert!((m[u][v] - m[v][u]).abs() <= 1e-12 * m[u][v].max(1.0));
                    prop_assert!((m[u][v] - bf[v]).abs() <= 1e-9 * bf[v].max(1.0));
                }
                for w in 0..n {
                    let bound = m[u][v] + m[v][w];
                    if integer {
                        prop_assert!(m[u][w] <= bound);
                    } else {
                        prop_assert!(m[u][w] <= bound * (1.0 + 1e-9));
                    }
                }
            }
        }
    }

    #[test]
    fn furthest_neighbor_is_a_linear_scan(seed in any::<u64>(), n in 2usize..=25) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (_, g) = random_graph(&mut rng, n, false);
        let o = DistanceOracle::new(&g);
        let p = random_point_subset(&g, rng.gen_range(1..=n), seed).unwrap();
        for v in 0..n {
            let (z, d) = furthest_neighbor(&o, v, &p).unwrap();
            let row = sssp(&g, v).unwrap();
            let best = p.iter().map(|q| row[q]).fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(d, best);
            prop_assert_eq!(z, p.iter().find(|&q| row[q] == best).unwrap());
        }
    }

    #[test]
    fn validators_match_definitions(seed in any::<u64>(), n in 2usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (edges, g) = random_graph(&mut rng, n, true);
        let o = DistanceOracle::new(&g);
        let d = floyd_warshall(n, &edges);

        let f = random_pair_family(&mut rng, n, &d, PairKind::Comatching);
        prop_assert_eq!(validate_comatching(&o, &f).unwrap().valid, pair_family_ok(&d, &f, |i, j| Some(i == j)));
        prop_assert_eq!(
            validate_semi_ladder(&o, &f).unwrap().valid,
            pair_family_ok(&d, &f, |i, j| if i == j { Some(true) } else if i < j { Some(false) } else { None })
        );
        prop_assert_eq!(validate_ladder(&o, &f).unwrap().valid, pair_family_ok(&d, &f, |i, j| Some(i >= j)));

        let len = rng.gen_range(1..=4);
        let triples: Vec<Triple> = (0..len)
            .map(|_| Triple { p: rng.gen_range(0..n), top: rng.gen_range(0..n), bottom: rng.gen_range(0..n) })
            .collect();
        let t = TripleFamily::new(f.radius, f.epsilon, triples.clone());
        let close = (1.0 - t.epsilon) * t.radius;
        let mut expected = true;
        for i in 0..len {
            for j in 0..len {
                if i <= j {
                    expected &= d[triples[j].p][triples[i].top] > t.radius && d[triples[i].p][triples[j].bottom] > t.radius;
                }
                if i < j {
                    expected &= d[triples[i].p][triples[j].top] <= close && d[triples[j].p][triples[i].bottom] <= close;
                }
            }
        }
        prop_assert_eq!(validate_double_ladder(&o, &t).unwrap().valid, expected);

        let entries: Vec<(usize, Vec<usize>)> = (0..len)
            .map(|_| (rng.gen_range(0..n), (0..rng.gen_range(1..=2)).map(|_| rng.gen_range(0..n)).collect()))
            .collect();
        let kf = KTupleFamily::new(2, f.radius, f.epsilon, entries.clone());
        let to_set = |p: usize, xs: &[usize]| xs.iter().map(|&x| d[p][x]).fold(f64::INFINITY, f64::min);
        let expected = entries.iter().enumerate().all(|(a, (p, _))| {
            entries.iter().enumerate().all(|(b, (_, xs))| {
                if a == b { to_set(*p, xs) > kf.radius } else { to_set(*p, xs) <= close }
            })
        });
        prop_assert_eq!(validate_k_comatching(&o, &kf).unwrap().valid, expected);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn comatching_index_is_monotone_in_eps(seed in any::<u64>(), n in 2usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (_, g) = random_graph(&mut rng, n, true);
        let o = DistanceOracle::new(&g);
        let sizes: Vec<usize> = [0.1, 0.2, 0.4]
            .iter()
            .map(|&e| max_comatching(&o, e, None, DEFAULT_COMPATIBILITY_CAP).unwrap().len())
            .collect();
        prop_assert!(sizes[0] >= sizes[1] && sizes[1] >= sizes[2], "{:?}", sizes);
    }

    #[test]
    fn comatching_diameter_on_cross_path_graphs(seed in any::<u64>(), w in 2usize..=3, h in 3usize..=4) {
        let g = grid(w, h, WeightDist::Integer(1, 5), seed).unwrap();
        let o = DistanceOracle::new(&g);
        let f = max_comatching(&o, 0.2, None, DEFAULT_COMPATIBILITY_CAP).unwrap();
        prop_assume!(f.len() >= 3);
        let sub = cross_path_subgraph(&o, &f).unwrap();
        let so = DistanceOracle::new(&sub);
        prop_assert!(cross_paths_cover_edges(&so, &f));
        prop_assert!(validate_comatching(&so, &f).unwrap().valid);
        let touched = PointSet::from_ids(sub.edges().iter().flat_map(|&(a, b, _)| [a, b]));
        for u in touched.iter() {
            for v in touched.iter() {
                prop_assert!(so.dist(u, v) <= 3.0 * f.radius);
            }
        }
    }

    #[test]
    fn ramsey_output_validates_at_half_eps(seed in any::<u64>(), m in 2usize..=7, eps in 0.1f64..0.6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (g, triples) = hand_double_ladder(m, &mut rng);
        let o = DistanceOracle::new(&g);
        let fam = TripleFamily::new(5.0, eps, triples).as_k_comatching();
        let out = ramsey_extract(&o, &fam).unwrap();
        prop_assert!(out.structure.len() >= out.index_set.len());
        let (valid, e) = match &out.structure {
            Extracted::Comatching(f) => (validate_comatching(&o, f).unwrap().valid, f.epsilon),
            Extracted::DoubleLadder(f) => (validate_double_ladder(&o, f).unwrap().valid, f.epsilon),
        };
        prop_assert!(valid);
        prop_assert_eq!(e, eps / 2.0);
    }

    #[test]
    fn planar_ball_systems_have_small_vc_dimension(seed in any::<u64>(), w in 1usize..=6, h in 1usize..=5, dist in any::<u8>(), rounds in 0usize..6) {
        let mut g = grid(w, h, weight_dist(dist), seed).unwrap();
        if g.edge_count() > 0 {
            g = random_subdivision(&g, rounds, seed).unwrap();
        }
        prop_assume!(g.vertex_count() <= 30);
        let o = DistanceOracle::new(&g);
        let sys = ball_system(&o, &PointSet::all(g.vertex_count())).unwrap();
        prop_assert!(vc_dim_at_most(&sys, 4).unwrap());
        prop_assert!(sys.len() as u128 <= sauer_shelah(sys.universe_size() as u64, 4));
    }

    #[test]
    fn rounding_always_hits(seed in any::<u64>(), n in 2usize..=20, sets in 1usize..=25) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lists: Vec<Vec<usize>> = (0..sets)
            .map(|_| {
                let mut s: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.3)).collect();
                if s.is_empty() {
                    s.push(rng.gen_range(0..n));
                }
                s
            })
            .collect();
        let inst = HittingSetInstance::from_lists(n, lists).unwrap();
        let frac = lp_fractional(&inst, DEFAULT_GAMMA).unwrap();
        let r = round_vc(&inst, &frac, 4, seed).unwrap();
        prop_assert!(verify_hitting(&inst, &r.set).unwrap().hits_all);
        let greedy = greedy_hitting_set(&inst).len() as f64;
        prop_assert!(frac.dual_bound <= greedy + 1e-9);
        prop_assert!(greedy <= (1.0 + (n as f64).ln()) * frac.value * (1.0 + DEFAULT_GAMMA) + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn coresets_are_valid(seed in any::<u64>(), w in 2usize..=7, h in 2usize..=7, dist in any::<u8>(), eps in 0.05f64..0.95, frac in 0.1f64..=1.0) {
        let g = grid(w, h, weight_dist(dist), seed).unwrap();
        let n = g.vertex_count();
        let p = random_point_subset(&g, ((n as f64 * frac).ceil() as usize).clamp(1, n), seed).unwrap();
        let o = DistanceOracle::new(&g);
        let greedy = greedy_coreset(&o, &p, eps, None).unwrap();
        let lp = lp_coreset(&o, &p, eps, seed).unwrap();
        prop_assert!(verify_coreset(&o, &p, &greedy.points, eps).unwrap().valid);
        prop_assert!(verify_coreset(&o, &p, &lp.points, eps).unwrap().valid);
    }

    #[test]
    fn kcenter_coresets_are_valid(seed in any::<u64>(), w in 2usize..=5, h in 2usize..=5, k in 1usize..=2, eps in 0.2f64..0.8) {
        let g = grid(w, h, WeightDist::Integer(1, 4), seed).unwrap();
        let o = DistanceOracle::new(&g);
        let p = PointSet::all(g.vertex_count());
        let r = kcenter_coreset(&o, &p, k, eps, seed).unwrap();
        prop_assert!(verify_kcenter(&o, &p, &r.points, k, eps).unwrap().valid);
    }

    #[test]
    fn generators_are_deterministic_and_round_trip(seed in any::<u64>(), w in 1usize..=8, h in 1usize..=8, dist in any::<u8>(), rounds in 0usize..10) {
        let build = || {
            let g = grid(w, h, weight_dist(dist), seed).unwrap();
            let g = if g.edge_count() > 0 { random_subdivision(&g, rounds, seed).unwrap() } else { g };
            let p = random_point_subset(&g, g.vertex_count().div_ceil(2), seed).unwrap();
            Instance::new(g).with_points(p).with_meta("seed", seed)
        };
        let a = build().to_json().unwrap();
        prop_assert_eq!(&a, &build().to_json().unwrap());
        prop_assert_eq!(Instance::from_json(&a).unwrap(), build());
    }
}
