//! Scenario generation, timed experiment runs and report emission.

mod examples;
mod report;
mod scenario;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use examples::{example_case_count, example_scenario, DEFAULT_SEED};
pub use report::{
    emit_report, fmt6, round6, ReportFormat, ScenarioReport, SubdomainRow, CSV_COLUMNS,
};
pub use scenario::{
    generate_scenario, geometry, skewed_counts, Distribution, Region, Scenario, Topology,
};

use crate::balance::{balance, BalanceOptions, BalanceTrace, SpatialDecomposition};
use crate::dd::{dd_solve, DdOptions, DdSolveReport, IndexDecomposition, SweepMode};
use crate::error::Result;
use crate::estimation::{kf_assimilate_cls, ClsProblem};
use crate::linalg::{norm_inf, sub, DenseVector};

/// Row block size of the Kalman filter in [`run_monolithic`].
pub const KF_BLOCK: usize = 64;

/// How an experiment is executed; kept apart from the scenario itself.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    /// Timed repetitions; the median is reported.
    pub repetitions: usize,
    /// Run once untimed before the repetitions.
    pub warmup: bool,
    pub mode: SweepMode,
    /// Threads for the additive solve; `None` means one per subdomain.
    pub workers: Option<usize>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            repetitions: 5,
            warmup: true,
            mode: SweepMode::Additive,
            workers: None,
        }
    }
}

impl RunOptions {
    /// One untimed-warm-up-free repetition, for tests.
    pub fn single() -> Self {
        Self {
            repetitions: 1,
            warmup: false,
            ..Self::default()
        }
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Runs `f` (after an optional warm-up) `reps` times; returns the last
/// result and the median wall time in seconds.
fn timed<T>(reps: usize, warmup: bool, mut f: impl FnMut() -> Result<T>) -> Result<(T, f64)> {
    if warmup {
        f()?;
    }
    let mut times = Vec::with_capacity(reps.max(1));
    let mut last = None;
    for _ in 0..reps.max(1) {
        let t = Instant::now();
        let out = f()?;
        times.push(t.elapsed().as_secs_f64());
        last = Some(out);
    }
    Ok((last.expect("at least one repetition"), median(times)))
}

/// Sequential Kalman filter solve and its wall time in seconds.
pub fn run_monolithic(prob: &ClsProblem) -> Result<(DenseVector, f64)> {
    let start = Instant::now();
    let x = kf_assimilate_cls(prob, KF_BLOCK.min(prob.m1()))?;
    Ok((x, start.elapsed().as_secs_f64()))
}

/// Column decomposition for the scenario with row owners attached: state
/// rows follow their diagonal column, observation rows follow the balanced
/// spatial owner.
pub fn column_decomposition(
    sc: &Scenario,
    prob: &ClsProblem,
    deco: &SpatialDecomposition,
) -> Result<IndexDecomposition> {
    let cols = IndexDecomposition::uniform(sc.n, sc.p, sc.s)?;
    let n = sc.n;
    let mut owners: Vec<usize> = (0..prob.m0())
        .map(|r| {
            if r < n {
                (0..sc.p).find(|&i| cols.range(i).contains(&r)).unwrap_or(0)
            } else {
                (r - n) % sc.p
            }
        })
        .collect();
    owners.extend_from_slice(deco.owners());
    cols.with_row_assignment(owners)
}

pub fn dd_options(sc: &Scenario, opts: &RunOptions) -> DdOptions {
    DdOptions {
        mu: sc.mu,
        tol: sc.tol,
        max_iter: sc.max_iter,
        mode: opts.mode,
        workers: opts.workers,
    }
}

/// Balancing only, with timings from a single run.
pub fn run_balance(sc: &Scenario) -> Result<(SpatialDecomposition, BalanceTrace)> {
    let (_, deco) = generate_scenario(sc)?;
    balance(deco, &BalanceOptions { max_rounds: sc.max_rounds })
}

/// Generate, balance, solve by domain decomposition and by the Kalman filter,
/// and collect every metric.
pub fn run_experiment(sc: &Scenario, opts: &RunOptions) -> Result<ScenarioReport> {
    let (prob, deco) = generate_scenario(sc)?;
    let bal = BalanceOptions { max_rounds: sc.max_rounds };

    if opts.warmup {
        balance(deco.clone(), &bal)?;
    }
    let mut t_dydd = Vec::new();
    let mut t_r = Vec::new();
    let mut balanced = None;
    for _ in 0..opts.repetitions.max(1) {
        let (d, trace) = balance(deco.clone(), &bal)?;
        t_dydd.push(trace.t_dydd);
        t_r.push(trace.t_r);
        balanced = Some((d, trace));
    }
    let (deco, trace) = balanced.expect("at least one repetition");
    let t_dydd = median(t_dydd);
    let t_r = median(t_r);

    let cols = column_decomposition(sc, &prob, &deco)?;
    let dd_opts = dd_options(sc, opts);
    let (dd, tp): (DdSolveReport, f64) =
        timed(opts.repetitions, opts.warmup, || dd_solve(&prob, &cols, &dd_opts))?;
    let (x_kf, t1) = timed(opts.repetitions, opts.warmup, || {
        kf_assimilate_cls(&prob, KF_BLOCK.min(prob.m1()))
    })?;
    let error = norm_inf(&sub(&x_kf, &dd.x_global));

    let g = deco.graph();
    let subdomains = (0..sc.p)
        .map(|i| SubdomainRow {
            i: i + 1,
            deg: g.degree(i),
            i_ad: g.neighbours(i).into_iter().map(|j| j + 1).collect(),
            l_in: trace.l_in[i],
            l_r: trace.l_r[i],
            l_fin: trace.l_fin[i],
        })
        .collect();
    let speedup = t1 / tp;
    Ok(ScenarioReport {
        case: sc.name.clone().unwrap_or_else(|| "custom".into()),
        n: sc.n,
        m: sc.m,
        p: sc.p,
        seed: sc.seed,
        subdomains,
        e: trace.e,
        t_dydd,
        t_r,
        oh_dydd: if t_dydd > 0.0 { t_r / t_dydd } else { 0.0 },
        t1,
        tp,
        speedup,
        efficiency: speedup / sc.p as f64,
        error,
        iterations: dd.iterations,
        rounds: trace.rounds,
        converged: dd.converged,
        balanced: trace.balanced,
    })
}
