use std::path::PathBuf;

use dydd_core::estimation::cls_solve;
use dydd_core::harness::{
    emit_report, example_scenario, generate_scenario, run_experiment, run_monolithic,
    Distribution, ReportFormat, RunOptions, Scenario, ScenarioReport, Topology, CSV_COLUMNS,
    DEFAULT_SEED,
};

fn small(topology: Topology, p: usize, distribution: Distribution, m: u64) -> Scenario {
    Scenario {
        name: Some("small".into()),
        n: 64,
        m,
        p,
        topology,
        distribution,
        seed: 7,
        s: 2,
        mu: 1.0,
        tol: 1e-10,
        max_iter: 500,
        max_rounds: 10,
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

#[test]
fn shipped_scenarios_match_builtins() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let cases = [
        ("ex1_case1", 1, 1),
        ("ex1_case2", 1, 2),
        ("ex2_case1", 2, 1),
        ("ex2_case2", 2, 2),
        ("ex2_case3", 2, 3),
        ("ex2_case4", 2, 4),
        ("ex3_p8", 3, 3),
        ("ex3_p32", 3, 5),
        ("ex4_p8", 4, 3),
    ];
    for (file, ex, case) in cases {
        let text = std::fs::read_to_string(dir.join(format!("{file}.json"))).unwrap();
        let shipped = Scenario::from_json(&text).unwrap();
        assert_eq!(shipped, example_scenario(ex, case, DEFAULT_SEED).unwrap(), "{file}");
    }
}

#[test]
fn monolithic_matches_normal_equations() {
    let sc = small(Topology::Chain, 4, Distribution::Uniform, 40);
    let (prob, _) = generate_scenario(&sc).unwrap();
    let (x, t1) = run_monolithic(&prob).unwrap();
    assert!(t1 > 0.0);
    let oracle = cls_solve(&prob).unwrap();
    let scale = oracle.norm_inf().max(1.0);
    assert!(max_diff(&x, &oracle) <= 1e-9 * scale);
    let (again, _) = run_monolithic(&prob).unwrap();
    assert_eq!(x, again);
}

#[test]
fn empty_distribution_leaves_listed_cells_empty() {
    let sc = small(Topology::Chain, 4, Distribution::Empty { empty_ids: vec![2, 4] }, 41);
    let (_, deco) = generate_scenario(&sc).unwrap();
    assert_eq!(deco.loads(), vec![21, 0, 20, 0]);
}

#[test]
fn experiment_metrics_and_determinism() {
    let sc = small(
        Topology::Grid,
        4,
        Distribution::Weighted { counts: vec![10, 0, 30, 20] },
        60,
    );
    let a = run_experiment(&sc, &RunOptions::single()).unwrap();
    let b = run_experiment(&sc, &RunOptions::single()).unwrap();
    assert_eq!(a.oh_dydd, a.t_r / a.t_dydd);
    assert_eq!(a.speedup, a.t1 / a.tp);
    assert_eq!(a.efficiency, a.speedup / a.p as f64);
    assert!(a.t_r > 0.0 && a.oh_dydd >= 0.0);
    assert!(a.converged && a.error <= 1e-8);
    assert_eq!(a.subdomains.len(), 4);
    assert_eq!(a.subdomains[0].i_ad, vec![2, 4]);
    for (x, y) in a.subdomains.iter().zip(&b.subdomains) {
        assert_eq!(x, y);
    }
    assert_eq!((a.e, a.error, a.iterations), (b.e, b.error, b.iterations));
}

#[test]
fn report_files() {
    let sc = small(Topology::Pair, 2, Distribution::Weighted { counts: vec![30, 10] }, 40);
    let report = run_experiment(&sc, &RunOptions::single()).unwrap();
    let dir = tempfile::tempdir().unwrap();

    let json_path = dir.path().join("r.json");
    emit_report(&report, ReportFormat::Json, Some(&json_path)).unwrap();
    let back: ScenarioReport =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(back, report.rounded());

    let csv_path = dir.path().join("r.csv");
    emit_report(&report, ReportFormat::Csv, Some(&csv_path)).unwrap();
    let mut rdr = csv::Reader::from_path(&csv_path).unwrap();
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), CSV_COLUMNS);
    let rows: Vec<_> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(&rows[0][8], "1.00000");
    assert_eq!(&rows[1][7], "20");

    let missing = dir.path().join("no/such/dir/r.csv");
    assert!(matches!(
        emit_report(&report, ReportFormat::Csv, Some(&missing)),
        Err(dydd_core::Error::Io(_))
    ));
}
