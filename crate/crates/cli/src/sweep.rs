//! `sweep`: both constructors over seeded square grids.
//!
//! CSV columns, one row per (size, trial, eps, method):
//! `side, n, trial, instance_seed, method, eps, q_size, buckets,
//! tau_star_sum, dual_bound_sum, lp_iterations, valid, wall_ms`.
//! Everything except `wall_ms` is a function of the flags.

use std::io::Write;
use std::time::Instant;

use anyhow::{bail, Result};
use planar_coreset::generators::grid;
use planar_coreset::{greedy_coreset, lp_coreset, verify_coreset, DistanceOracle, PointSet};
use serde::Serialize;

use crate::output::sink;
use crate::{Format, Method, Status, SweepArgs};

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub side: usize,
    pub n: usize,
    pub trial: usize,
    pub instance_seed: u64,
    pub method: &'static str,
    pub eps: f64,
    pub q_size: usize,
    pub buckets: usize,
    pub tau_star_sum: f64,
    pub dual_bound_sum: f64,
    pub lp_iterations: usize,
    pub valid: bool,
    pub wall_ms: f64,
}

/// Seed of trial `trial` on side `side`, mixed so nearby inputs differ.
fn instance_seed(seed: u64, side: usize, trial: usize) -> u64 {
    let mut z = seed ^ (side as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (trial as u64).rotate_left(32);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^ (z >> 31)
}

fn run_instance(args: &SweepArgs, side: usize, trial: usize) -> Result<Vec<Row>> {
    let seed = instance_seed(args.seed, side, trial);
    let g = grid(side, side, args.weights, seed)?;
    let points = PointSet::all(g.vertex_count());
    let oracle = DistanceOracle::new(&g);
    oracle.prefetch_all();
    let mut rows = Vec::new();
    for &eps in &args.eps_list {
        for &method in &args.methods {
            let start = Instant::now();
            let result = match method {
                Method::Greedy => greedy_coreset(&oracle, &points, eps, None)?,
                Method::Lp => lp_coreset(&oracle, &points, eps, seed)?,
            };
            let wall_ms = start.elapsed().as_secs_f64() * 1e3;
            let valid = verify_coreset(&oracle, &points, &result.points, eps)?.valid;
            rows.push(Row {
                side,
                n: g.vertex_count(),
                trial,
                instance_seed: seed,
                method: match method {
                    Method::Greedy => "greedy",
                    Method::Lp => "lp",
                },
                eps,
                q_size: result.points.len(),
                buckets: result.buckets.len(),
                tau_star_sum: result.buckets.iter().fold(0.0, |acc, b| acc + b.tau_star),
                dual_bound_sum: result.buckets.iter().fold(0.0, |acc, b| acc + b.dual_bound),
                lp_iterations: result.buckets.iter().map(|b| b.lp_iterations).sum(),
                valid,
                wall_ms,
            });
        }
    }
    Ok(rows)
}

pub fn rows(args: &SweepArgs) -> Result<Vec<Row>> {
    if args.trials == 0 {
        bail!(planar_coreset::Error::InvalidParameter("trials must be positive".into()));
    }
    let jobs: Vec<(usize, usize)> = args.sizes.iter().flat_map(|&s| (0..args.trials).map(move |t| (s, t))).collect();
    #[cfg(feature = "parallel")]
    let results: Vec<Result<Vec<Row>>> = {
        use rayon::prelude::*;
        jobs.par_iter().map(|&(s, t)| run_instance(args, s, t)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<Vec<Row>>> = jobs.iter().map(|&(s, t)| run_instance(args, s, t)).collect();
    let mut out = Vec::new();
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}

pub fn run(args: &SweepArgs, format: Format) -> Result<Status> {
    let rows = rows(args)?;
    let all_valid = rows.iter().all(|r| r.valid);
    let format = if args.csv.is_some() { Format::Csv } else { format };
    let mut w = sink(args.csv.as_deref())?;
    match format {
        Format::Csv => {
            let mut csv = csv::Writer::from_writer(&mut w);
            for row in &rows {
                csv.serialize(row)?;
            }
            csv.flush()?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, &rows)?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(if all_valid { Status::Ok } else { Status::Invalid })
}
