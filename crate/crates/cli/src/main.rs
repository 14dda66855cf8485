//! `planar-coreset`: instance generators, coreset constructors and verifiers
//! for graph metrics.
//!
//! Exit codes: 0 ok, 1 verification failure, 2 input error, 3 cap exceeded,
//! 4 disconnected instance.

mod commands;
mod output;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use planar_coreset::generators::WeightDist;

pub const THREADS_VAR: &str = "PLANAR_CORESET_THREADS";

#[derive(Parser)]
#[command(name = "planar-coreset", version, about = "Furthest-neighbor and k-center coresets on graph metrics")]
pub struct Cli {
    /// Format of reports and results. Instance files are always JSON.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Greedy,
    Lp,
}

#[derive(Subcommand)]
pub enum Command {
    /// Generate an instance file.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Build a furthest-neighbor coreset and certify it.
    Coreset {
        #[arg(value_enum)]
        method: Method,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        io: InOut,
    },
    /// Build a k-center coreset and certify it over all centre sets.
    Kcoreset {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        io: InOut,
    },
    /// Check a result or structure against an instance; exits 1 when invalid.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Exact comatching search.
    #[command(subcommand)]
    Comatching(ComatchingCommand),
    /// Structure extraction.
    #[command(subcommand)]
    Extract(ExtractCommand),
    /// VC-dimension checks on the ball system of an instance.
    #[command(subcommand)]
    Vc(VcCommand),
    /// Run both constructors over seeded grids and write one CSV row per run.
    Sweep(SweepArgs),
}

#[derive(Args)]
pub struct InOut {
    /// Instance file.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand)]
pub enum GenCommand {
    /// `width x height` grid, optionally with a random point subset.
    Grid {
        #[arg(long)]
        width: usize,
        #[arg(long)]
        height: usize,
        /// `unit`, `uniform:LO:HI` or `integer:LO:HI`.
        #[arg(long, default_value = "unit", value_parser = parse_weights)]
        weights: WeightDist,
        /// Number of points; every vertex when omitted.
        #[arg(long)]
        points: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Subdivide random edges of an instance, preserving distances.
    Subdiv {
        #[arg(long)]
        rounds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        io: InOut,
    },
    /// Two mirrored binary trees with a height-weighted matching.
    Soko {
        #[arg(long)]
        k: usize,
        /// Recorded only; the family is deterministic.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Binary tree with depth-length pendant paths.
    Treek {
        #[arg(long)]
        k: usize,
        /// Recorded only; the family is deterministic.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Nested cycle gadgets.
    Planarkd {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        d: usize,
        /// Recorded only; the family is deterministic.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
pub enum VerifyCommand {
    /// Coreset result (`Q`, `epsilon`) against the instance.
    Coreset {
        #[command(flatten)]
        io: InOut,
        /// Result file holding `Q`.
        #[arg(long)]
        coreset: PathBuf,
        /// Overrides the result's `epsilon`.
        #[arg(long)]
        eps: Option<f64>,
    },
    /// k-center result (`Q`, `k`, `epsilon`) against the instance.
    Kcoreset {
        #[command(flatten)]
        io: InOut,
        #[arg(long)]
        coreset: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Pair family as an eps-comatching.
    Comatching(FamilyArgs),
    /// Pair family as an eps-ladder.
    Ladder(FamilyArgs),
    /// Pair family as an eps-semi-ladder.
    Semiladder(FamilyArgs),
    /// Triple family as an eps-double ladder.
    Doubleladder(FamilyArgs),
    /// Tuple family as a (k, eps)-comatching.
    Kcomatching(FamilyArgs),
    /// The instance's entries as a (k, d)-comatching.
    Lowerbound {
        #[command(flatten)]
        io: InOut,
        /// Set size bound; the instance's `k` when omitted.
        #[arg(long)]
        k: Option<usize>,
        /// Distance threshold; the instance's `d` when omitted.
        #[arg(long)]
        d: Option<usize>,
    },
}

#[derive(Args)]
pub struct FamilyArgs {
    #[command(flatten)]
    pub io: InOut,
    /// Family file.
    #[arg(long)]
    pub family: PathBuf,
}

#[derive(Subcommand)]
pub enum ComatchingCommand {
    /// Largest eps-comatching over all sufficient radii.
    Max {
        #[arg(long)]
        eps: f64,
        /// Largest compatibility graph searched per radius.
        #[arg(long, default_value_t = planar_coreset::structures::DEFAULT_COMPATIBILITY_CAP)]
        cap: usize,
        #[command(flatten)]
        io: InOut,
    },
}

#[derive(Subcommand)]
pub enum ExtractCommand {
    /// Comatching or double ladder at eps/2 from a (2, eps)-comatching.
    Ramsey {
        /// Tuple family file.
        #[arg(long = "in")]
        input: PathBuf,
        /// Instance the family lives in.
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
pub enum VcCommand {
    /// Whether no set of `d + 1` points is shattered by balls.
    Check {
        #[arg(long, default_value_t = 4)]
        d: usize,
        #[command(flatten)]
        io: InOut,
    },
}

#[derive(Args)]
pub struct SweepArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub eps_list: Vec<f64>,
    /// Grid side lengths.
    #[arg(long, value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_delimiter = ',', value_enum, default_values_t = [Method::Greedy, Method::Lp])]
    pub methods: Vec<Method>,
    #[arg(long, default_value = "uniform:1:10", value_parser = parse_weights)]
    pub weights: WeightDist,
    /// CSV output; stdout in `--format` when omitted.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

fn parse_weights(text: &str) -> Result<WeightDist, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || format!("expected unit, uniform:LO:HI or integer:LO:HI, got {text:?}");
    match parts.as_slice() {
        ["unit"] => Ok(WeightDist::Unit),
        ["uniform", lo, hi] => Ok(WeightDist::Uniform(lo.parse().map_err(|_| bad())?, hi.parse().map_err(|_| bad())?)),
        ["integer", lo, hi] => Ok(WeightDist::Integer(lo.parse().map_err(|_| bad())?, hi.parse().map_err(|_| bad())?)),
        _ => Err(bad()),
    }
}

/// Outcome of a command that ran to completion.
#[derive(Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    Invalid,
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(text) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| anyhow::anyhow!("{THREADS_VAR} must be a positive integer, got {text:?}"))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use planar_coreset::Error;
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::CapExceeded { .. } => 3,
                Error::Disconnected { .. } => 4,
                Error::Internal(_) | Error::Extraction(_) | Error::NonConvergence { .. } => 1,
                _ => 2,
            };
        }
    }
    2
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| commands::run(&cli));
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Invalid) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
