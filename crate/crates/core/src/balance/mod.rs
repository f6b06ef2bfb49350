//! Dynamic load balancing of observations over the subdomain graph.
//!
//! One call to [`balance`] splits empty subdomains, then alternates Laplacian
//! scheduling and boundary migration until the loads are as even as integer
//! counts allow, no flow is scheduled, or the round limit is hit.

mod graph;
mod spatial;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use graph::{
    apply_flows, balance_metric, build_laplacian, compute_imbalance, round_flow, schedule,
    BalanceSchedule, ProcessorGraph,
};
pub use spatial::{check_and_split, migrate, Point, Rect, Segment, SpatialDecomposition, Split};

use crate::error::Result;

pub const DEFAULT_MAX_ROUNDS: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalanceOptions {
    pub max_rounds: usize,
}

impl Default for BalanceOptions {
    fn default() -> Self {
        Self {
            max_rounds: DEFAULT_MAX_ROUNDS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BalanceTrace {
    pub l_in: Vec<u64>,
    pub l_r: Vec<u64>,
    pub l_fin: Vec<u64>,
    pub splits: Vec<Split>,
    /// Scheduling rounds that moved observations.
    pub rounds: usize,
    pub migrated: u64,
    /// `min / max` of `l_fin`, zero if some subdomain ended empty.
    pub e: f64,
    /// Every `|l_i − l̄| < 1`.
    pub perfect: bool,
    /// `max |l_i − l̄| ≤ ceil(max_degree / 2)`.
    pub balanced: bool,
    /// Wall time of the whole call, seconds.
    pub t_dydd: f64,
    /// Wall time of the splitting step, seconds; zero when nothing was split.
    pub t_r: f64,
}

/// `max_i |p·l_i − Σl|`, i.e. `p · max_i |l_i − l̄|` in exact integers.
fn scaled_deviation(loads: &[u64]) -> u128 {
    let p = loads.len() as i128;
    let total: i128 = loads.iter().map(|&l| l as i128).sum();
    loads
        .iter()
        .map(|&l| (p * l as i128 - total).unsigned_abs())
        .max()
        .unwrap_or(0)
}

fn is_perfect(loads: &[u64]) -> bool {
    scaled_deviation(loads) < loads.len() as u128
}

fn within_degree_bound(g: &ProcessorGraph) -> bool {
    let bound = g.max_degree().div_ceil(2) as u128;
    scaled_deviation(g.loads()) <= bound * g.p() as u128
}

/// Full balancing pass; returns the rebalanced decomposition and its trace.
pub fn balance(
    deco: SpatialDecomposition,
    opts: &BalanceOptions,
) -> Result<(SpatialDecomposition, BalanceTrace)> {
    let start = Instant::now();
    let l_in = deco.loads();

    let split_start = Instant::now();
    let (mut deco, splits) = check_and_split(deco)?;
    let t_r = if splits.is_empty() {
        0.0
    } else {
        split_start.elapsed().as_secs_f64()
    };
    let l_r = deco.loads();

    let mut rounds = 0;
    let mut migrated = 0;
    while rounds < opts.max_rounds && !is_perfect(&deco.loads()) {
        let s = schedule(&deco.graph())?;
        if s.is_idle() {
            break;
        }
        let (next, moved) = migrate(deco, &s)?;
        deco = next;
        migrated += moved;
        rounds += 1;
    }

    let g = deco.graph();
    let l_fin = deco.loads();
    let trace = BalanceTrace {
        e: balance_metric(&l_fin).unwrap_or(0.0),
        perfect: is_perfect(&l_fin),
        balanced: within_degree_bound(&g),
        l_in,
        l_r,
        l_fin,
        splits,
        rounds,
        migrated,
        t_dydd: start.elapsed().as_secs_f64(),
        t_r,
    };
    Ok((deco, trace))
}
