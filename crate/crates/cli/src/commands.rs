//! Command dispatch. Every constructor runs its verifier before reporting
//! success.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use planar_coreset::generators::{grid, random_point_subset, random_subdivision};
use planar_coreset::structures::{
    max_comatching, ramsey_extract, validate_comatching, validate_double_ladder, validate_k_comatching,
    validate_ladder, validate_semi_ladder, Extracted, KTupleFamily, PairFamily, TripleFamily, ValidationReport,
};
use planar_coreset::vc::{ball_system, sauer_shelah, vc_dim_at_most};
use planar_coreset::{
    gen_planar_kd, gen_soko, gen_tree_k, greedy_coreset, kcenter_coreset, lp_coreset, verify_coreset, verify_kcenter,
    verify_lower_bound, DistanceOracle, Instance, LowerBoundInstance, PointSet,
};
use serde::Serialize;
use serde_json::Value;

use crate::output::{emit, read_json};
use crate::{
    Cli, ComatchingCommand, Command, ExtractCommand, FamilyArgs, GenCommand, Method, Status, VcCommand, VerifyCommand,
};

pub fn run(cli: &Cli) -> Result<Status> {
    let format = cli.format;
    match &cli.command {
        Command::Gen(cmd) => generate(cmd),
        Command::Coreset { method, eps, seed, io } => {
            let inst = read_instance(&io.input)?;
            let points = inst.point_set();
            let oracle = DistanceOracle::new(&inst.graph);
            let result = match method {
                Method::Greedy => greedy_coreset(&oracle, &points, *eps, None)?,
                Method::Lp => lp_coreset(&oracle, &points, *eps, *seed)?,
            };
            let report = verify_coreset(&oracle, &points, &result.points, *eps)?;
            if !report.valid {
                bail!(planar_coreset::Error::Internal(format!("coreset failed verification: {report:?}")));
            }
            emit(&result, format, io.out.as_deref())?;
            Ok(Status::Ok)
        }
        Command::Kcoreset { k, eps, seed, io } => {
            let inst = read_instance(&io.input)?;
            let points = inst.point_set();
            let oracle = DistanceOracle::new(&inst.graph);
            let result = kcenter_coreset(&oracle, &points, *k, *eps, *seed)?;
            let report = verify_kcenter(&oracle, &points, &result.points, *k, *eps)?;
            if !report.valid {
                bail!(planar_coreset::Error::Internal(format!("k-center coreset failed verification: {report:?}")));
            }
            emit(&result, format, io.out.as_deref())?;
            Ok(Status::Ok)
        }
        Command::Verify(cmd) => verify(cmd, format),
        Command::Comatching(ComatchingCommand::Max { eps, cap, io }) => {
            let inst = read_instance(&io.input)?;
            let oracle = DistanceOracle::new(&inst.graph);
            let family = max_comatching(&oracle, *eps, None, *cap)?;
            if !family.is_empty() && !validate_comatching(&oracle, &family)?.valid {
                bail!(planar_coreset::Error::Internal("searcher returned an invalid comatching".into()));
            }
            emit(&family, format, io.out.as_deref())?;
            Ok(Status::Ok)
        }
        Command::Extract(ExtractCommand::Ramsey { input, graph, out }) => {
            let family: KTupleFamily = read_json(input)?;
            let inst = read_instance(graph)?;
            let oracle = DistanceOracle::new(&inst.graph);
            let outcome = ramsey_extract(&oracle, &family)?;
            let valid = match &outcome.structure {
                Extracted::Comatching(f) => validate_comatching(&oracle, f)?.valid,
                Extracted::DoubleLadder(f) => validate_double_ladder(&oracle, f)?.valid,
            };
            emit(&outcome, format, out.as_deref())?;
            Ok(if valid { Status::Ok } else { Status::Invalid })
        }
        Command::Vc(VcCommand::Check { d, io }) => {
            let inst = read_instance(&io.input)?;
            let oracle = DistanceOracle::new(&inst.graph);
            let system = ball_system(&oracle, &inst.point_set())?;
            let holds = vc_dim_at_most(&system, *d)?;
            let report = VcReport {
                d: *d,
                vc_dim_at_most: holds,
                universe: system.universe_size(),
                sets: system.len(),
                sauer_shelah_bound: sauer_shelah(system.universe_size() as u64, *d as u64).to_string(),
            };
            emit(&report, format, io.out.as_deref())?;
            Ok(if holds { Status::Ok } else { Status::Invalid })
        }
        Command::Sweep(args) => crate::sweep::run(args, format),
    }
}

fn read_instance(path: &Path) -> Result<Instance> {
    Instance::read(path).with_context(|| format!("loading instance {}", path.display()))
}

#[derive(Serialize)]
struct VcReport {
    d: usize,
    vc_dim_at_most: bool,
    universe: usize,
    sets: usize,
    sauer_shelah_bound: String,
}

fn generate(cmd: &GenCommand) -> Result<Status> {
    let (inst, out) = match cmd {
        GenCommand::Grid { width, height, weights, points, seed, out } => {
            let g = grid(*width, *height, *weights, *seed)?;
            let mut inst = Instance::new(g)
                .with_meta("generator", "grid")
                .with_meta("width", *width)
                .with_meta("height", *height)
                .with_meta("weights", serde_json::to_value(weights)?)
                .with_meta("seed", *seed);
            if let Some(m) = points {
                let p = random_point_subset(&inst.graph, *m, *seed)?;
                inst = inst.with_points(p);
            }
            (inst, out)
        }
        GenCommand::Subdiv { rounds, seed, io } => {
            let base = read_instance(&io.input)?;
            let graph = random_subdivision(&base.graph, *rounds, *seed)?;
            let mut inst = Instance { graph, ..base };
            inst.meta.insert("subdivision_rounds".into(), (*rounds).into());
            inst.meta.insert("subdivision_seed".into(), (*seed).into());
            (inst, &io.out)
        }
        GenCommand::Soko { k, seed, out } => (lower_bound(gen_soko(*k)?, *seed)?, out),
        GenCommand::Treek { k, seed, out } => (lower_bound(gen_tree_k(*k)?, *seed)?, out),
        GenCommand::Planarkd { k, d, seed, out } => (lower_bound(gen_planar_kd(*k, *d)?, *seed)?, out),
    };
    match out {
        Some(path) => inst.write(path)?,
        None => println!("{}", inst.to_json()?),
    }
    Ok(Status::Ok)
}

fn lower_bound(lb: LowerBoundInstance, seed: u64) -> Result<Instance> {
    let report = lb.verify()?;
    if !report.valid {
        bail!(planar_coreset::Error::Internal(format!("generated family failed verification: {report:?}")));
    }
    Ok(Instance::from(lb).with_meta("seed", seed))
}

#[derive(Serialize)]
struct Checked<R: Serialize> {
    check: &'static str,
    #[serde(flatten)]
    report: R,
}

fn finish<R: Serialize>(
    check: &'static str,
    valid: bool,
    report: R,
    format: crate::Format,
    out: Option<&Path>,
) -> Result<Status> {
    emit(&Checked { check, report }, format, out)?;
    Ok(if valid { Status::Ok } else { Status::Invalid })
}

/// `Q` and the optional `epsilon` / `k` fields of a result file.
fn result_fields(path: &Path) -> Result<(PointSet, Option<f64>, Option<usize>)> {
    let value: Value = read_json(path)?;
    let q = value.get("Q").ok_or_else(|| anyhow!("{} has no \"Q\" field", path.display()))?;
    let q: Vec<usize> =
        serde_json::from_value(q.clone()).with_context(|| format!("malformed \"Q\" in {}", path.display()))?;
    let eps = value.get("epsilon").and_then(Value::as_f64);
    let k = value.get("k").and_then(Value::as_u64).map(|k| k as usize);
    Ok((PointSet::from_ids(q), eps, k))
}

fn verify(cmd: &VerifyCommand, format: crate::Format) -> Result<Status> {
    match cmd {
        VerifyCommand::Coreset { io, coreset, eps } => {
            let inst = read_instance(&io.input)?;
            let (q, file_eps, _) = result_fields(coreset)?;
            let eps = eps.or(file_eps).ok_or_else(|| anyhow!("no eps given and none recorded in the result"))?;
            let oracle = DistanceOracle::new(&inst.graph);
            let report = verify_coreset(&oracle, &inst.point_set(), &q, eps)?;
            finish("coreset", report.valid, report, format, io.out.as_deref())
        }
        VerifyCommand::Kcoreset { io, coreset, k, eps } => {
            let inst = read_instance(&io.input)?;
            let (q, file_eps, file_k) = result_fields(coreset)?;
            let eps = eps.or(file_eps).ok_or_else(|| anyhow!("no eps given and none recorded in the result"))?;
            let k = k.or(file_k).ok_or_else(|| anyhow!("no k given and none recorded in the result"))?;
            let oracle = DistanceOracle::new(&inst.graph);
            let report = verify_kcenter(&oracle, &inst.point_set(), &q, k, eps)?;
            finish("kcoreset", report.valid, report, format, io.out.as_deref())
        }
        VerifyCommand::Comatching(a) => pairs(a, "comatching", validate_comatching, format),
        VerifyCommand::Ladder(a) => pairs(a, "ladder", validate_ladder, format),
        VerifyCommand::Semiladder(a) => pairs(a, "semiladder", validate_semi_ladder, format),
        VerifyCommand::Doubleladder(a) => {
            let inst = read_instance(&a.io.input)?;
            let family: TripleFamily = read_json(&a.family)?;
            let report = validate_double_ladder(&DistanceOracle::new(&inst.graph), &family)?;
            finish("doubleladder", report.valid, report, format, a.io.out.as_deref())
        }
        VerifyCommand::Kcomatching(a) => {
            let inst = read_instance(&a.io.input)?;
            let family: KTupleFamily = read_json(&a.family)?;
            let report = validate_k_comatching(&DistanceOracle::new(&inst.graph), &family)?;
            finish("kcomatching", report.valid, report, format, a.io.out.as_deref())
        }
        VerifyCommand::Lowerbound { io, k, d } => {
            let inst = read_instance(&io.input)?;
            let entries = inst.entries.as_ref().ok_or_else(|| anyhow!("{} has no entries", io.input.display()))?;
            let k = k.or(inst.k).ok_or_else(|| anyhow!("no k given and none recorded in the instance"))?;
            let d = d.or(inst.d).ok_or_else(|| anyhow!("no d given and none recorded in the instance"))?;
            let report = verify_lower_bound(&inst.graph, entries, k, d)?;
            finish("lowerbound", report.valid, report, format, io.out.as_deref())
        }
    }
}

fn pairs(
    a: &FamilyArgs,
    check: &'static str,
    validate: fn(&DistanceOracle<'_>, &PairFamily) -> planar_coreset::Result<ValidationReport>,
    format: crate::Format,
) -> Result<Status> {
    let inst = read_instance(&a.io.input)?;
    let family: PairFamily = read_json(&a.family)?;
    let report = validate(&DistanceOracle::new(&inst.graph), &family)?;
    finish(check, report.valid, report, format, a.io.out.as_deref())
}
