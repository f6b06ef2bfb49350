use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dydd_core::dd::{dd_solve, IndexDecomposition, SweepMode};
use dydd_core::estimation::cls_solve;
use dydd_core::harness::{
    emit_report, example_case_count, example_scenario, generate_scenario, run_balance,
    run_experiment, ReportFormat, RunOptions, Scenario, DEFAULT_SEED,
};
use dydd_core::linalg::{norm_inf, sub};
use dydd_core::Error;
use serde_json::json;

const EXIT_NOT_DONE: u8 = 2;
const EXIT_INVALID: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(name = "dydd", version, about = "Observation load balancing and domain-decomposed CLS solves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Split empty subdomains and rebalance observations.
    Balance {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Solve the scenario's CLS problem by domain decomposition.
    Solve {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Additive)]
        mode: Mode,
        #[arg(long)]
        workers: Option<usize>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run a built-in example end to end and emit its report.
    Experiment {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        example: u8,
        #[arg(long)]
        case: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Timed repetitions (median reported, after one warm-up run).
        #[arg(long, default_value_t = 5)]
        repetitions: usize,
        #[arg(long, value_enum, default_value_t = Mode::Additive)]
        mode: Mode,
        #[arg(long)]
        workers: Option<usize>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Print the JSON scenario of a built-in example.
    Scenario {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        example: u8,
        #[arg(long)]
        case: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

#[derive(Args)]
struct Overrides {
    #[arg(long)]
    max_rounds: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    overlap: Option<usize>,
}

impl Overrides {
    fn apply(&self, mut sc: Scenario) -> Result<Scenario, Error> {
        if let Some(v) = self.max_rounds {
            sc.max_rounds = v;
        }
        if let Some(v) = self.tol {
            sc.tol = v;
        }
        if let Some(v) = self.mu {
            sc.mu = v;
        }
        if let Some(v) = self.overlap {
            sc.s = v;
        }
        sc.validate()?;
        Ok(sc)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Additive,
    Multiplicative,
}

impl From<Mode> for SweepMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Additive => SweepMode::Additive,
            Mode::Multiplicative => SweepMode::Multiplicative,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn load_scenario(path: &Path, overrides: &Overrides) -> Result<Scenario, Error> {
    let text = fs::read_to_string(path)?;
    overrides.apply(Scenario::from_json(&text)?)
}

fn write_json(value: &serde_json::Value, out: Option<&Path>) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match out {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn one_based(ids: &[usize]) -> Vec<usize> {
    ids.iter().map(|i| i + 1).collect()
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Balance { scenario, out, overrides } => {
            let sc = load_scenario(&scenario, &overrides)?;
            let (deco, t) = run_balance(&sc)?;
            let g = deco.graph();
            let report = json!({
                "case": sc.name,
                "p": sc.p,
                "i_ad": (0..sc.p).map(|i| one_based(&g.neighbours(i))).collect::<Vec<_>>(),
                "l_in": t.l_in,
                "l_r": t.l_r,
                "l_fin": t.l_fin,
                "splits": t.splits.iter().map(|s| json!({"empty": s.empty + 1, "from": s.from + 1})).collect::<Vec<_>>(),
                "rounds": t.rounds,
                "migrated": t.migrated,
                "E": t.e,
                "perfect": t.perfect,
                "balanced": t.balanced,
                "T_DyDD": t.t_dydd,
                "T_r": t.t_r,
                "Oh_DyDD": if t.t_dydd > 0.0 { t.t_r / t.t_dydd } else { 0.0 },
            });
            write_json(&report, out.as_deref())?;
            Ok(t.balanced)
        }
        Command::Solve { scenario, mode, workers, overrides } => {
            let sc = load_scenario(&scenario, &overrides)?;
            let (prob, _) = generate_scenario(&sc)?;
            let cols = IndexDecomposition::uniform(sc.n, sc.p, sc.s)?;
            let opts = dydd_core::dd::DdOptions {
                mu: sc.mu,
                tol: sc.tol,
                max_iter: sc.max_iter,
                mode: mode.into(),
                workers,
            };
            let start = Instant::now();
            let mut rep = dd_solve(&prob, &cols, &opts)?;
            let elapsed = start.elapsed().as_secs_f64();
            let x = cls_solve(&prob)?;
            rep.set_oracle(&x);
            let report = json!({
                "case": sc.name,
                "p": sc.p,
                "mode": opts.mode,
                "iterations": rep.iterations,
                "converged": rep.converged,
                "final_step": rep.residual_history.last(),
                "error_vs_normal_equations": norm_inf(&sub(&rep.x_global, &x)),
                "seconds": elapsed,
            });
            write_json(&report, None)?;
            Ok(rep.converged)
        }
        Command::Experiment {
            example,
            case,
            seed,
            format,
            out,
            repetitions,
            mode,
            workers,
            overrides,
        } => {
            let sc = overrides.apply(example_scenario(example, case, seed)?)?;
            let opts = RunOptions {
                repetitions: repetitions.max(1),
                mode: mode.into(),
                workers,
                ..RunOptions::default()
            };
            let report = run_experiment(&sc, &opts)?;
            let format = match format {
                Format::Csv => ReportFormat::Csv,
                Format::Json => ReportFormat::Json,
            };
            emit_report(&report, format, out.as_deref())?;
            Ok(report.converged && report.balanced)
        }
        Command::Scenario { example, case, seed } => {
            if example_case_count(example).is_none() {
                return Err(Error::InvalidScenario(format!("no example {example}")));
            }
            println!("{}", example_scenario(example, case, seed)?.to_json());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_NOT_DONE),
        Err(e) => {
            eprintln!("dydd: {e}");
            ExitCode::from(match e {
                Error::InvalidScenario(_) | Error::InfeasibleDistribution(_) | Error::Serde(_) => EXIT_INVALID,
                Error::Io(_) | Error::Csv(_) => EXIT_IO,
                _ => 1,
            })
        }
    }
}
