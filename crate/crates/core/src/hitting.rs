//! Hitting-set LP, VC-style rounding and the greedy fallback.
//!
//! The LP `min sum x_u  s.t.  sum_{u in A} x_u >= 1` is solved approximately by
//! multiplicative weights on the packing dual. Every iteration yields a
//! feasible primal point and a feasible dual point, so the returned value is
//! certified against `dual_bound <= tau* <= value`.

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vc::{weighted_epsilon_net_sample, SetSystem};

pub const DEFAULT_GAMMA: f64 = 0.01;
pub const MWU_ITERATION_CAP: usize = 100_000;

/// Sets to hit, over the universe `0..universe_size`. No set may be empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HittingSetInstance {
    system: SetSystem,
}

impl HittingSetInstance {
    pub fn new(system: SetSystem) -> Result<Self> {
        if let Some(i) = system.sets().iter().position(|s| s.is_clear()) {
            return Err(Error::EmptySet(i));
        }
        Ok(Self { system })
    }

    pub fn from_lists<I, S>(universe_size: usize, lists: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: IntoIterator<Item = usize>,
    {
        Self::new(SetSystem::from_lists(universe_size, lists)?)
    }

    pub fn system(&self) -> &SetSystem {
        &self.system
    }

    pub fn universe_size(&self) -> usize {
        self.system.universe_size()
    }

    pub fn sets(&self) -> &[FixedBitSet] {
        self.system.sets()
    }

    /// Largest number of sets containing a single element.
    pub fn max_frequency(&self) -> usize {
        (0..self.universe_size()).map(|u| self.sets().iter().filter(|s| s.contains(u)).count()).max().unwrap_or(0)
    }

    pub fn to_json(&self) -> serde_json::Value {
        self.system.to_json()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionalSolution {
    pub x: Vec<f64>,
    /// `sum x`.
    pub value: f64,
    /// `min_A sum_{u in A} x_u`; at least 1 for a feasible point.
    pub slack: f64,
    /// Packing solution `y` per set, feasible for the dual.
    pub dual: Vec<f64>,
    /// `sum y`, a lower bound on the LP optimum.
    pub dual_bound: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl FractionalSolution {
    pub fn is_feasible(&self, tolerance: f64) -> bool {
        self.slack >= 1.0 - tolerance
    }
}

fn coverage(sets: &[Vec<usize>], x: &[f64]) -> f64 {
    sets.iter().map(|s| s.iter().map(|&u| x[u]).sum::<f64>()).fold(f64::INFINITY, f64::min)
}

/// Indices of inclusion-minimal sets. Dropping supersets changes neither the
/// LP optimum nor the family of hitting sets.
fn minimal_sets(sets: &[FixedBitSet]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..sets.len()).collect();
    order.sort_by_key(|&i| (sets[i].count_ones(..), i));
    let mut kept: Vec<usize> = Vec::new();
    for i in order {
        if !kept.iter().any(|&k| sets[k].is_subset(&sets[i])) {
            kept.push(i);
        }
    }
    kept.sort_unstable();
    kept
}

/// Solves the LP to relative accuracy `gamma`, or fails with the best
/// certified bounds after [`MWU_ITERATION_CAP`] iterations.
pub fn lp_fractional(instance: &HittingSetInstance, gamma: f64) -> Result<FractionalSolution> {
    let sol = lp_fractional_best_effort(instance, gamma, MWU_ITERATION_CAP)?;
    if sol.converged {
        Ok(sol)
    } else {
        Err(Error::NonConvergence { iterations: sol.iterations, best_value: sol.value, dual_bound: sol.dual_bound })
    }
}

/// Like [`lp_fractional`] but returns the best feasible point found even when
/// the accuracy target is missed (`converged` is then false).
pub fn lp_fractional_best_effort(
    instance: &HittingSetInstance,
    gamma: f64,
    max_iterations: usize,
) -> Result<FractionalSolution> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::param(format!("gamma must be positive, got {gamma}")));
    }
    let n = instance.universe_size();
    let all = instance.sets();
    let m_all = all.len();
    let finish = |x: Vec<f64>, dual: Vec<f64>, iterations: usize, converged: bool| {
        let lists: Vec<Vec<usize>> = all.iter().map(|s| s.ones().collect()).collect();
        let slack = coverage(&lists, &x);
        FractionalSolution {
            value: x.iter().sum(),
            slack,
            dual_bound: dual.iter().sum(),
            x,
            dual,
            iterations,
            converged,
        }
    };
    if m_all == 0 {
        return Ok(finish(vec![0.0; n], Vec::new(), 0, true));
    }

    // One element in every set: tau* = 1 exactly.
    let mut common = all[0].clone();
    for s in &all[1..] {
        common.intersect_with(s);
    }
    if let Some(u) = common.ones().next() {
        let mut x = vec![0.0; n];
        x[u] = 1.0;
        let mut dual = vec![0.0; m_all];
        dual[0] = 1.0;
        return Ok(finish(x, dual, 0, true));
    }

    let kept = minimal_sets(all);
    let sets: Vec<Vec<usize>> = kept.iter().map(|&i| all[i].ones().collect()).collect();
    let m = sets.len();
    let mut elem_sets: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (a, s) in sets.iter().enumerate() {
        for &u in s {
            elem_sets[u].push(a);
        }
    }
    let active: Vec<usize> = (0..n).filter(|&u| !elem_sets[u].is_empty()).collect();

    let mut len = vec![0.0f64; n];
    for &u in &active {
        len[u] = 1.0;
    }
    let mut set_len: Vec<f64> = sets.iter().map(|s| s.len() as f64).collect();
    let mut total: f64 = active.len() as f64;

    let mut best_ub = f64::INFINITY;
    let mut best_x = vec![0.0; n];
    let mut best_lb = 0.0f64;
    let mut best_dual = vec![0.0; m];
    let mut iterations = 0;
    let mut converged = false;

    let recompute = |len: &mut Vec<f64>, set_len: &mut Vec<f64>, total: &mut f64| {
        let scale = *total;
        for &u in &active {
            len[u] /= scale;
        }
        for (a, s) in sets.iter().enumerate() {
            set_len[a] = s.iter().map(|&u| len[u]).sum();
        }
        *total = active.iter().map(|&u| len[u]).sum();
    };

    let ln_n = ((active.len() + 1) as f64).ln();
    let mut eta = 0.5;
    'phases: while iterations < max_iterations {
        let budget = ((4.0 * ln_n / (eta * eta)).ceil() as usize).max(50);
        let mut y = vec![0u32; m];
        let mut load = vec![0u32; n];
        let mut max_load = 0u32;
        let mut steps = 0u32;
        recompute(&mut len, &mut set_len, &mut total);
        for _ in 0..budget {
            if iterations >= max_iterations {
                break 'phases;
            }
            iterations += 1;
            let (a_min, l_min) =
                set_len
                    .iter()
                    .enumerate()
                    .fold((0, f64::INFINITY), |acc, (a, &l)| if l < acc.1 { (a, l) } else { acc });
            let ub = total / l_min;
            if ub < best_ub {
                best_ub = ub;
                for &u in &active {
                    best_x[u] = len[u] / l_min;
                }
            }
            if best_ub <= (1.0 + gamma) * best_lb {
                converged = true;
                break 'phases;
            }
            y[a_min] += 1;
            steps += 1;
            for &u in &sets[a_min] {
                load[u] += 1;
                max_load = max_load.max(load[u]);
                let delta = len[u] * eta;
                len[u] += delta;
                total += delta;
                for &b in &elem_sets[u] {
                    set_len[b] += delta;
                }
            }
            let lb = steps as f64 / max_load as f64;
            if lb > best_lb {
                best_lb = lb;
                for (a, &c) in y.iter().enumerate() {
                    best_dual[a] = c as f64 / max_load as f64;
                }
            }
            if total > 1e100 {
                recompute(&mut len, &mut set_len, &mut total);
            }
        }
        eta = (eta / 2.0).max(1e-4);
    }

    // Exact rescaling so the returned point is feasible to the last bit.
    let cov = coverage(&sets, &best_x);
    if cov > 0.0 && cov.is_finite() {
        for v in &mut best_x {
            *v /= cov;
        }
        while coverage(&sets, &best_x) < 1.0 {
            for v in &mut best_x {
                *v *= 1.0 + f64::EPSILON;
            }
        }
    }
    let mut dual = vec![0.0; m_all];
    for (a, &i) in kept.iter().enumerate() {
        dual[i] = best_dual[a];
    }
    let sol = finish(best_x, dual, iterations, converged);
    Ok(FractionalSolution { converged: converged || sol.value <= (1.0 + gamma) * sol.dual_bound, ..sol })
}

/// Knobs of the sampling rounder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundingConfig {
    /// Constant `c` in the sample size `c * d * tau * ln(tau + 2)`.
    pub c: f64,
    pub max_rounds: usize,
    /// The sample size doubles after this many failed rounds.
    pub double_every: usize,
}

impl Default for RoundingConfig {
    fn default() -> Self {
        Self { c: 8.0, max_rounds: 20, double_every: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rounding {
    /// Hitting set as sorted universe elements.
    pub set: Vec<usize>,
    /// Sampling rounds used (the successful one included).
    pub rounds: usize,
    pub fallback: bool,
    /// Initial sample size.
    pub sample_size: usize,
    pub seed: u64,
}

/// Independent seed for stream `stream` derived from `seed` (splitmix64).
pub(crate) fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn hits_all(sets: &[FixedBitSet], chosen: &FixedBitSet) -> bool {
    sets.iter().all(|s| !s.is_disjoint(chosen))
}

/// Rounds a feasible fractional solution by weighted net sampling, assuming
/// VC dimension `d`. Falls back to greedy when sampling keeps failing, so the
/// result always hits every set.
pub fn round_vc(instance: &HittingSetInstance, frac: &FractionalSolution, d: usize, seed: u64) -> Result<Rounding> {
    round_vc_with(instance, frac, d, seed, &RoundingConfig::default())
}

pub fn round_vc_with(
    instance: &HittingSetInstance,
    frac: &FractionalSolution,
    d: usize,
    seed: u64,
    config: &RoundingConfig,
) -> Result<Rounding> {
    let n = instance.universe_size();
    if frac.x.len() != n {
        return Err(Error::param(format!("fractional solution has {} entries, universe has {n}", frac.x.len())));
    }
    if !frac.is_feasible(1e-9) {
        return Err(Error::param(format!("fractional solution is infeasible (slack {})", frac.slack)));
    }
    let sets = instance.sets();
    let tau = frac.value;
    let base = (config.c * d.max(1) as f64 * tau * (tau + 2.0).ln()).ceil().max(1.0) as usize;
    if sets.is_empty() {
        return Ok(Rounding { set: Vec::new(), rounds: 0, fallback: false, sample_size: base, seed });
    }
    let mut size = base;
    for round in 0..config.max_rounds {
        if round > 0 && config.double_every > 0 && round % config.double_every == 0 {
            size = size.saturating_mul(2);
        }
        let draws = weighted_epsilon_net_sample(&frac.x, size, derive_seed(seed, round as u64))?;
        let mut chosen = FixedBitSet::with_capacity(n);
        for u in draws {
            chosen.insert(u);
        }
        if hits_all(sets, &chosen) {
            return Ok(Rounding {
                set: prune(sets, chosen, &frac.x),
                rounds: round + 1,
                fallback: false,
                sample_size: base,
                seed,
            });
        }
    }
    Ok(Rounding {
        set: greedy_hitting_set(instance),
        rounds: config.max_rounds,
        fallback: true,
        sample_size: base,
        seed,
    })
}

/// Drops redundant elements, lightest first.
fn prune(sets: &[FixedBitSet], mut chosen: FixedBitSet, x: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = chosen.ones().collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
    for u in order {
        chosen.set(u, false);
        if !hits_all(sets, &chosen) {
            chosen.insert(u);
        }
    }
    chosen.ones().collect()
}

/// Repeatedly takes the element hitting the most unhit sets (smallest id on
/// ties).
pub fn greedy_hitting_set(instance: &HittingSetInstance) -> Vec<usize> {
    let n = instance.universe_size();
    let sets = instance.sets();
    let mut unhit: Vec<usize> = (0..sets.len()).collect();
    let mut chosen = Vec::new();
    while !unhit.is_empty() {
        let mut counts = vec![0usize; n];
        for &a in &unhit {
            for u in sets[a].ones() {
                counts[u] += 1;
            }
        }
        let best = (0..n).max_by_key(|&u| (counts[u], std::cmp::Reverse(u))).expect("nonempty universe");
        chosen.push(best);
        unhit.retain(|&a| !sets[a].contains(best));
    }
    chosen.sort_unstable();
    chosen
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HitReport {
    pub hits_all: bool,
    pub first_unhit: Option<usize>,
}

pub fn verify_hitting(instance: &HittingSetInstance, x: &[usize]) -> Result<HitReport> {
    let n = instance.universe_size();
    let mut chosen = FixedBitSet::with_capacity(n);
    for &u in x {
        if u >= n {
            return Err(Error::param(format!("element {u} outside universe of size {n}")));
        }
        chosen.insert(u);
    }
    let first_unhit = instance.sets().iter().position(|s| s.is_disjoint(&chosen));
    Ok(HitReport { hits_all: first_unhit.is_none(), first_unhit })
}
