//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs as a plain binary so every line is printed; exits non-zero when any
//! criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use dydd_core::balance::{
    balance, build_laplacian, check_and_split, migrate, schedule, BalanceOptions,
    BalanceSchedule, Point, ProcessorGraph, Rect, SpatialDecomposition,
};
use dydd_core::dd::{dd_solve, DdOptions, IndexDecomposition};
use dydd_core::estimation::{cls_solve, kf_assimilate_cls, ClsProblem};
use dydd_core::harness::{
    example_scenario, run_balance, run_experiment, RunOptions, ScenarioReport, DEFAULT_SEED,
};
use dydd_core::linalg::{DenseMatrix, DenseVector, WeightMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn run_balance_case(ex: u8, case: usize) -> (dydd_core::balance::BalanceTrace, f64) {
    let sc = example_scenario(ex, case, DEFAULT_SEED).expect("built-in scenario");
    let t = Instant::now();
    let (_, trace) = run_balance(&sc).expect("balance runs");
    (trace, t.elapsed().as_secs_f64())
}

fn two_subdomain_rebalance() -> Outcome {
    let (t, secs) = run_balance_case(1, 1);
    check(
        t.l_in == [1000, 500] && t.l_fin == [750, 750] && t.e == 1.0 && t.rounds == 1 && secs < 1.0,
        format!("l_in {:?} l_fin {:?} E {} rounds {} in {secs:.3}s", t.l_in, t.l_fin, t.e, t.rounds),
    )
}

fn empty_subdomain_recovery() -> Outcome {
    let (t, secs) = run_balance_case(1, 2);
    let oh = t.t_r / t.t_dydd;
    check(
        t.l_in == [1500, 0]
            && t.l_r == [1000, 500]
            && t.l_fin == [750, 750]
            && t.e == 1.0
            && t.t_r > 0.0
            && oh > 0.0
            && secs < 1.0,
        format!("l_r {:?} l_fin {:?} E {} T_r {:.2e}s Oh {oh:.3} in {secs:.3}s", t.l_r, t.l_fin, t.e, t.t_r),
    )
}

fn four_subdomain_cases() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for case in 1..=4 {
        let (t, secs) = run_balance_case(2, case);
        let mut good = t.l_fin == [375; 4] && t.e == 1.0 && secs < 2.0;
        if case == 4 {
            good &= t.l_r == [500, 250, 250, 500];
        }
        ok &= good;
        parts.push(format!("case {case}: l_r {:?} l_fin {:?} E {} ({secs:.3}s)", t.l_r, t.l_fin, t.e));
    }
    check(ok, parts.join("; "))
}

fn star_residual_imbalance() -> Outcome {
    let start = Instant::now();
    let (t8, _) = run_balance_case(3, 3);
    let (t32, _) = run_balance_case(3, 5);
    let secs = start.elapsed().as_secs_f64();
    let max = *t32.l_fin.iter().max().unwrap();
    let min = *t32.l_fin.iter().min().unwrap();
    let max_degree = (t32.l_fin.len() - 1) as u64;
    check(
        max - min <= max_degree && t32.e >= 0.82 && t8.e >= 0.99 && secs < 5.0,
        format!(
            "p=8 E {:.4}; p=32 l_max {max} l_min {min} E {:.4} (needs >= 0.82) in {secs:.3}s",
            t8.e, t32.e
        ),
    )
}

fn dd_accuracy() -> (Outcome, Vec<ScenarioReport>) {
    let start = Instant::now();
    let mut reports = Vec::new();
    let mut ok = true;
    let mut parts = Vec::new();
    for (ex, case) in [(1, 1), (2, 1)] {
        let sc = example_scenario(ex, case, DEFAULT_SEED).expect("built-in scenario");
        let r = run_experiment(&sc, &RunOptions::single()).expect("experiment runs");
        ok &= r.converged && r.error <= 1e-8 && r.n == 2048;
        parts.push(format!("p={} error {:.2e} after {} iterations", r.p, r.error, r.iterations));
        reports.push(r);
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 60.0;
    parts.push(format!("{secs:.1}s"));
    (check(ok, parts.join("; ")), reports)
}

fn random_cls(rng: &mut ChaCha8Rng) -> ClsProblem {
    let n = rng.gen_range(8..=32);
    let m0 = n + n / 4 + 1;
    let m1 = rng.gen_range(1..=2 * n);
    let mut h0 = DenseMatrix::zeros(m0, n);
    for i in 0..m0 {
        for j in 0..n {
            h0[(i, j)] = rng.gen_range(-1.0..1.0);
        }
        if i < n {
            h0[(i, i)] += 2.0 * (n as f64).sqrt() + 1.0;
        }
    }
    let mut h1 = DenseMatrix::zeros(m1, n);
    for i in 0..m1 {
        h1[(i, rng.gen_range(0..n))] = 1.0;
    }
    let y0: Vec<f64> = (0..m0).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let y1: Vec<f64> = (0..m1).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let r0 = WeightMatrix::diagonal((0..m0).map(|_| rng.gen_range(0.5..2.0)).collect()).unwrap();
    let r1 = WeightMatrix::diagonal((0..m1).map(|_| rng.gen_range(0.5..2.0)).collect()).unwrap();
    ClsProblem::new(h0, DenseVector::new(y0).unwrap(), h1, DenseVector::new(y1).unwrap(), r0, r1)
        .unwrap()
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut worst_kf, mut worst_dd) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let prob = random_cls(&mut rng);
        let x = cls_solve(&prob).unwrap();
        let scale = x.norm_inf().max(f64::MIN_POSITIVE);
        let block = rng.gen_range(1..=prob.m1());
        let kf = kf_assimilate_cls(&prob, block).unwrap();
        let rel = kf.iter().zip(x.iter()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / scale;
        worst_kf = worst_kf.max(rel);
        for s in [0, 2] {
            let deco = IndexDecomposition::uniform(prob.n(), 2, s).unwrap();
            let rep = dd_solve(&prob, &deco, &DdOptions::default()).unwrap();
            let err = rep.x_global.iter().zip(x.iter()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            worst_dd = worst_dd.max(if rep.converged { err } else { f64::INFINITY });
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst_kf <= 1e-9 && worst_dd <= 1e-8 && secs < 30.0,
        format!("worst KF relative {worst_kf:.2e}, worst DD {worst_dd:.2e} over 50 problems in {secs:.2}s"),
    )
}

fn random_graph(p: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut edges: Vec<(usize, usize)> = (1..p).map(|v| (rng.gen_range(0..v), v)).collect();
    for _ in 0..rng.gen_range(0..=p) {
        let (a, b) = (rng.gen_range(0..p), rng.gen_range(0..p));
        if a != b {
            edges.push((a, b));
        }
    }
    edges
}

fn scheduling_algebra() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut failures = Vec::new();
    let (mut splits, mut migrations) = (0, 0);
    for trial in 0..200 {
        let p = rng.gen_range(2..=32);
        let edges = random_graph(p, &mut rng);
        let m = rng.gen_range(p..=400);
        let points: Vec<Point> = (0..m)
            .map(|_| Point::new(rng.gen_range(0.0..p as f64), rng.gen_range(0.0..1.0)))
            .collect();
        let cells = (0..p)
            .map(|i| vec![Rect::new(i as f64, 0.0, (i + 1) as f64, 1.0).unwrap()])
            .collect();
        let deco =
            SpatialDecomposition::new(Rect::new(0.0, 0.0, p as f64, 1.0).unwrap(), cells, &edges, points)
                .unwrap();
        let g: ProcessorGraph = deco.graph();

        let l = build_laplacian(&g);
        if (0..p).any(|i| l.row(i).iter().sum::<f64>() != 0.0) {
            failures.push(format!("graph {trial}: Laplacian row sum"));
        }
        let s = schedule(&g).unwrap();
        let mean = g.mean_load();
        for i in 0..p {
            let out: f64 = g.neighbours(i).iter().map(|&j| s.lambda[i] - s.lambda[j]).sum();
            if (g.loads()[i] as f64 - out - mean).abs() > 1e-8 {
                failures.push(format!("graph {trial}: flow identity at {i}"));
            }
        }
        let shift = rng.gen_range(-1e3..1e3);
        let shifted = BalanceSchedule::from_potentials(&g, s.lambda.iter().map(|v| v + shift).collect::<Vec<_>>().into());
        if shifted.delta != s.delta {
            failures.push(format!("graph {trial}: gauge"));
        }

        if let Ok((split, events)) = check_and_split(deco) {
            splits += events.len();
            if split.loads().iter().sum::<u64>() != m as u64 {
                failures.push(format!("graph {trial}: split conservation"));
            }
            let sched = schedule(&split.graph()).unwrap();
            if let Ok((moved, _)) = migrate(split, &sched) {
                migrations += 1;
                if moved.loads().iter().sum::<u64>() != m as u64 {
                    failures.push(format!("graph {trial}: migration conservation"));
                }
                if let Ok((_, t)) = balance(moved, &BalanceOptions::default()) {
                    if t.l_fin.iter().sum::<u64>() != m as u64 {
                        failures.push(format!("graph {trial}: balance conservation"));
                    }
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let detail = format!(
        "200 graphs, {splits} splits, {migrations} migrations, {} violations in {secs:.2}s{}",
        failures.len(),
        failures.first().map(|f| format!(" (first: {f})")).unwrap_or_default()
    );
    check(failures.is_empty() && secs < 10.0, detail)
}

fn identities_hold(r: &ScenarioReport) -> bool {
    r.speedup == r.t1 / r.tp && r.efficiency == r.speedup / r.p as f64 && r.oh_dydd == r.t_r / r.t_dydd
}

fn speedup_trend(reports: &[ScenarioReport]) -> Outcome {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let ids = reports.iter().all(identities_hold);
    if threads < 8 {
        let detail = format!("{threads} hardware thread(s), trend needs 8; metric identities hold: {ids}");
        return if ids { Outcome::Skip(detail) } else { Outcome::Fail(detail) };
    }
    let run = |case| {
        let sc = example_scenario(4, case, DEFAULT_SEED).unwrap();
        run_experiment(&sc, &RunOptions::default()).unwrap()
    };
    let (p2, p8) = (run(1), run(3));
    check(
        ids && identities_hold(&p2) && identities_hold(&p8) && p8.tp < p2.tp,
        format!("Tp(p=2) {:.3}s, Tp(p=8) {:.3}s on {threads} threads", p2.tp, p8.tp),
    )
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |k: usize, name: &str, outcome: Outcome| {
        let (tag, detail) = match outcome {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Outcome::Skip(d) => ("SKIP", d),
        };
        println!("{tag} {k} {name}: {detail}");
    };
    report(1, "two-subdomain rebalance", two_subdomain_rebalance());
    report(2, "empty-subdomain recovery", empty_subdomain_recovery());
    report(3, "four-subdomain cases", four_subdomain_cases());
    report(4, "star residual imbalance", star_residual_imbalance());
    let (accuracy, reports) = dd_accuracy();
    report(5, "domain decomposition accuracy", accuracy);
    report(6, "oracle equivalence", oracle_equivalence());
    report(7, "scheduling algebra", scheduling_algebra());
    report(8, "speedup trend", speedup_trend(&reports));
    println!("{failed} of 8 criteria failed");
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
