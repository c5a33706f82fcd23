//! `fracmax` command-line front end.

mod config;
mod input;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fracmax::grid::{snap_mass, Grid, Interval};
use fracmax::maximizer::{self, AscentResult};
use fracmax::operator::Operator;
use fracmax::solver::{solve_direct, solve_iterative};
use fracmax::validation::run_suite;
use thiserror::Error;

use crate::config::{RunConfig, SolverName};
use crate::output::{Outputs, SolveSummary, SweepResult};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("{0}")]
    Failed(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Config(_) | CliError::Input(_) | CliError::Io(_) => 2,
            CliError::Budget(_) => 3,
        }
    }
}

impl From<fracmax::Error> for CliError {
    fn from(e: fracmax::Error) -> Self {
        use fracmax::Error as E;
        match e {
            E::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            E::Factorization | E::NotConverged { .. } => CliError::Failed(e.to_string()),
            E::DimensionMismatch { .. } => CliError::Input(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "fracmax",
    version,
    about = "Maximize the fractional Dirichlet energy over a rearrangement class"
)]
struct Cli {
    /// JSON run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Exit with status 1 on non-convergence or failed verification.
    #[arg(long, global = true)]
    strict: bool,
    /// Worker threads for restarts and brute-force batches.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Also write the assembled matrix as matrix.csv.
    #[arg(long, global = true)]
    dump_matrix: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the invariant suites at small scale and print a pass/fail table.
    Validate,
    /// Solve A u = f for a given right-hand side.
    Solve {
        /// CSV of per-cell values, or the literal `ones`.
        #[arg(long = "f", default_value = "ones")]
        source: String,
    },
    /// Alternating linear-oracle ascent.
    Maximize,
    /// Exhaustive search over all k-subsets.
    Brute,
    /// One ascent per exponent in the configured list.
    Sweep,
    /// Two-component concentration experiment.
    Twoball,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fracmax: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }

    match cli.threads {
        Some(0) => Err(CliError::Config("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Failed(e.to_string()))?
            .install(|| dispatch(cli, &cfg)),
        None => dispatch(cli, &cfg),
    }
}

fn build_grid(cfg: &RunConfig) -> Result<Grid, CliError> {
    let grid = Grid::build(&cfg.intervals(), cfg.h)?;
    for rec in grid.snap_report().iter().filter(|r| r.moved()) {
        eprintln!(
            "snap: interval #{} ({}, {}) -> ({}, {})",
            rec.index, rec.original.left, rec.original.right, rec.snapped.left, rec.snapped.right
        );
    }
    Ok(grid)
}

fn dispatch(cli: &Cli, cfg: &RunConfig) -> Result<(), CliError> {
    let out = Outputs::new(&cli.out, cli.threads)?;
    match &cli.command {
        Command::Validate => validate(cfg),
        Command::Solve { source } => solve(cli, cfg, &out, source),
        Command::Maximize => {
            let (grid, op) = assemble(cli, cfg, &out)?;
            let mass = snap_mass(&grid, cfg.beta)?;
            let result = maximizer::ascend(&op, mass.k, &cfg.ascent_options())?;
            out.write_maximizer("maximize", cfg, &grid, &mass, &result)?;
            summarize(&result);
            strict_check(cli, &result)
        }
        Command::Brute => {
            let (grid, op) = assemble(cli, cfg, &out)?;
            let mass = snap_mass(&grid, cfg.beta)?;
            let result = maximizer::brute_force(&op, mass.k, cfg.brute_limit as u128)?;
            out.write_maximizer("brute", cfg, &grid, &mass, &result)?;
            summarize(&result);
            strict_check(cli, &result)
        }
        Command::Sweep => {
            let grid = build_grid(cfg)?;
            let mass = snap_mass(&grid, cfg.beta)?;
            let rows = maximizer::sweep(&grid, &cfg.s.values(), cfg.beta, &cfg.ascent_options());
            for row in &rows {
                match &row.error {
                    None => println!(
                        "s={} k={} energy={:.10e} alpha_mid={:.6e} iterations={} ties={}",
                        row.s,
                        row.k.unwrap_or(0),
                        row.energy.unwrap_or(f64::NAN),
                        row.alpha_mid.unwrap_or(f64::NAN),
                        row.iterations.unwrap_or(0),
                        row.tie_cells.unwrap_or(0)
                    ),
                    Some(e) => println!("s={} error: {e}", row.s),
                }
            }
            let failed = rows
                .iter()
                .any(|r| r.error.is_some() || r.converged == Some(false));
            out.write_sweep(cfg, &grid, &SweepResult { k: mass.k, rows })?;
            if cli.strict && failed {
                return Err(CliError::Failed(
                    "sweep has failed or non-converged rows".into(),
                ));
            }
            Ok(())
        }
        Command::Twoball => {
            if cfg.domain.len() != 2 {
                return Err(CliError::Config(format!(
                    "config field `domain`: twoball needs exactly 2 intervals, got {}",
                    cfg.domain.len()
                )));
            }
            let grid = build_grid(cfg)?;
            let mass = snap_mass(&grid, cfg.beta)?;
            let [a, b] = [cfg.domain[0], cfg.domain[1]];
            let report = maximizer::two_component_experiment(
                Interval::new(a[0], a[1]),
                Interval::new(b[0], b[1]),
                cfg.h,
                cfg.single_s()?,
                mass.k,
                &cfg.ascent_options(),
            )?;
            if cli.dump_matrix {
                out.write_matrix(&Operator::assemble(&grid, cfg.single_s()?)?)?;
            }
            out.write_twoball(cfg, &grid, &mass, &report)?;
            summarize(&report.result);
            println!(
                "fractions=[{:.4}, {:.4}] concentrated={} J(u_hat)={:.10e} J(copy)={:.10e} copy_lowers_j={}",
                report.fractions[0],
                report.fractions[1],
                report.concentrated,
                report.j_hat,
                report.j_copy,
                report.copy_lowers_j
            );
            if !report.concentrated || !report.copy_lowers_j {
                eprintln!(
                    "warning: concentration heuristic did not manifest for this configuration"
                );
            }
            strict_check(cli, &report.result)
        }
    }
}

fn assemble(cli: &Cli, cfg: &RunConfig, out: &Outputs) -> Result<(Grid, Operator), CliError> {
    let grid = build_grid(cfg)?;
    let op = Operator::assemble(&grid, cfg.single_s()?)?;
    if cli.dump_matrix {
        out.write_matrix(&op)?;
    }
    Ok((grid, op))
}

fn summarize(r: &AscentResult) {
    let residual = r
        .obstacle_residual_inf()
        .map_or_else(|| "skipped".to_string(), |x| format!("{x:.3e}"));
    println!(
        "energy={:.10e} alpha_mid={:.6e} iterations={} residual={} ties={} converged={}",
        r.energy,
        r.alpha_mid(),
        r.iterations,
        residual,
        r.tie_cells(),
        r.converged
    );
}

fn strict_check(cli: &Cli, r: &AscentResult) -> Result<(), CliError> {
    if cli.strict && !(r.converged && r.verification.passed()) {
        return Err(CliError::Failed(format!(
            "strict mode: converged={} verification passed={}",
            r.converged,
            r.verification.passed()
        )));
    }
    Ok(())
}

fn validate(cfg: &RunConfig) -> Result<(), CliError> {
    let grid = build_grid(cfg)?;
    let opts = cfg.ascent_options();
    let mut failures = 0;
    println!("{:<6} {:<24} {:<6} detail", "s", "suite", "status");
    for s in cfg.s.values() {
        for check in run_suite(&grid, s, cfg.beta, &opts) {
            let status = match (check.passed, check.warning) {
                (false, _) => "FAIL",
                (true, true) => "WARN",
                (true, false) => "pass",
            };
            if !check.passed {
                failures += 1;
            }
            println!("{:<6} {:<24} {:<6} {}", s, check.name, status, check.detail);
        }
    }
    if failures > 0 {
        return Err(CliError::Failed(format!("{failures} check(s) failed")));
    }
    Ok(())
}

fn solve(cli: &Cli, cfg: &RunConfig, out: &Outputs, source: &str) -> Result<(), CliError> {
    let (grid, op) = assemble(cli, cfg, out)?;
    let f = if source == "ones" {
        vec![1.0; grid.len()]
    } else {
        input::read_values(std::path::Path::new(source))?
    };
    if f.len() != grid.len() {
        return Err(CliError::Input(format!(
            "f has {} values but the grid has {} cells",
            f.len(),
            grid.len()
        )));
    }
    let report = match cfg.solver {
        SolverName::Direct => solve_direct(&op, &f)?,
        SolverName::Iterative => solve_iterative(&op, &f, cfg.solver_tol, 10 * grid.len() + 100)?,
    };
    let summary = SolveSummary::new(&grid, &f, &report)?;
    out.write_solve(cfg, &grid, &summary, &report.u)?;
    println!(
        "energy={:.10e} residual={:.3e} u_mid={:.10e} iterations={}",
        summary.energy, summary.residual_inf, summary.u_mid, summary.iterations
    );
    Ok(())
}
