//! Furthest-neighbor and k-center coresets on shortest-path metrics of
//! edge-weighted graphs, with the combinatorial tooling around them:
//! comatching and ladder validators, an exact comatching searcher, VC checks
//! for ball systems, a fractional hitting-set solver with epsilon-net
//! rounding, and explicit lower-bound families.
//!
//! Data-parallel loops run on rayon when the `parallel` feature is enabled
//! (the default) and sequentially otherwise; results do not depend on it.

pub mod coreset;
pub mod error;
pub mod generators;
pub mod hitting;
pub mod io;
pub mod kcenter;
pub mod lowerbound;
pub mod metric;
pub mod par;
pub mod structures;
pub mod vc;

pub use coreset::{
    greedy_coreset, lp_coreset, lp_coreset_with, verify_coreset, CoresetMethod, CoresetReport, CoresetResult,
    LpCoresetConfig,
};
pub use error::{Error, Result};
pub use io::Instance;
pub use kcenter::{kcenter_coreset, kcenter_coreset_with, verify_kcenter, KCenterConfig, KCoresetResult};
pub use lowerbound::{gen_planar_kd, gen_soko, gen_tree_k, verify_lower_bound, LowerBoundInstance};
pub use metric::{DistanceOracle, PointSet, VertexId, WeightedGraph};
