//! `powerplan`: plan sample-size allocations across a portfolio of
//! concurrent experiments under a shared subject budget.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use commands::{Objective, RunConfig, Study};

#[derive(Parser)]
#[command(
    name = "powerplan",
    version,
    about = "Minimax experiment-portfolio budgeting: power-optimal allocations, \
             pilot-based correction factors, and simulation studies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Configuration document (TOML; portfolio or study)
    #[arg(long)]
    config: PathBuf,
    /// Write the primary table as CSV here (extra tables get suffixed names)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Render an SVG plot of the report
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Master seed for simulation commands (fixed default keeps runs reproducible)
    #[arg(long)]
    seed: Option<u64>,
    /// Reduce replicate counts for quick runs
    #[arg(long)]
    fast: bool,
    /// Coverage target for tolerance objectives
    #[arg(long)]
    gamma: Option<f64>,
    /// Tolerance target for confidence objectives
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Configuration document (optional overrides for built-in studies;
    /// required for `custom`)
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    fast: bool,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Power-optimal allocation for a known-sigma portfolio
    Allocate(CommonArgs),
    /// MSE-optimal allocation (comparison baseline)
    Mse(CommonArgs),
    /// Exact two-experiment correction-factor analysis
    TwoExp {
        #[command(subcommand)]
        objective: ObjectiveCmd,
    },
    /// Robust correction factors and allocation from pilot data
    Surrogate {
        #[command(subcommand)]
        objective: ObjectiveCmd,
    },
    /// Built-in simulation studies
    Simulate {
        #[command(subcommand)]
        study: StudyCmd,
    },
    /// Parse and validate a configuration document
    Validate(CommonArgs),
}

#[derive(Subcommand)]
enum ObjectiveCmd {
    /// Minimize the tolerance at a target coverage (--gamma)
    Tol(CommonArgs),
    /// Maximize coverage at a fixed tolerance (--delta)
    Conf(CommonArgs),
    /// Minimize the expected worst-case error
    Exp(CommonArgs),
}

impl ObjectiveCmd {
    fn split(&self) -> (&CommonArgs, Objective) {
        match self {
            ObjectiveCmd::Tol(a) => (a, Objective::Tol),
            ObjectiveCmd::Conf(a) => (a, Objective::Conf),
            ObjectiveCmd::Exp(a) => (a, Objective::Exp),
        }
    }
}

#[derive(Subcommand)]
enum StudyCmd {
    /// Known-sigma comparison: power-optimal vs MSE-optimal across budgets
    Fig1(SimulateArgs),
    /// Two-experiment optimal-ratio sweep, tolerance and confidence criteria
    Fig2(SimulateArgs),
    /// Two-experiment optimal-ratio sweep, expectation criterion
    Fig3(SimulateArgs),
    /// Policy comparison under the tolerance objective
    Fig4(SimulateArgs),
    /// Policy comparison under the confidence objective
    Fig5(SimulateArgs),
    /// Policy comparison under the expectation objective
    Fig6(SimulateArgs),
    /// Study named by the config document's `study` key
    Custom(SimulateArgs),
}

impl StudyCmd {
    fn split(&self) -> (&SimulateArgs, Option<Study>) {
        match self {
            StudyCmd::Fig1(a) => (a, Some(Study::Fig1)),
            StudyCmd::Fig2(a) => (a, Some(Study::Fig2)),
            StudyCmd::Fig3(a) => (a, Some(Study::Fig3)),
            StudyCmd::Fig4(a) => (a, Some(Study::Fig4)),
            StudyCmd::Fig5(a) => (a, Some(Study::Fig5)),
            StudyCmd::Fig6(a) => (a, Some(Study::Fig6)),
            StudyCmd::Custom(a) => (a, None),
        }
    }
}

fn run_config_from(args: &CommonArgs) -> Result<RunConfig> {
    Ok(RunConfig {
        document: config::load_document(&args.config)?,
        out: args.out.clone(),
        svg: args.svg.clone(),
        seed: args.seed,
        fast: args.fast,
        gamma: args.gamma,
        delta: args.delta,
    })
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Allocate(args) => {
            let cfg = run_config_from(args)?;
            let rep = commands::allocate(&cfg, false)?;
            commands::emit(&rep, &cfg)
        }
        Command::Mse(args) => {
            let cfg = run_config_from(args)?;
            let rep = commands::allocate(&cfg, true)?;
            commands::emit(&rep, &cfg)
        }
        Command::TwoExp { objective } => {
            let (args, obj) = objective.split();
            let cfg = run_config_from(args)?;
            let rep = commands::two_exp(&cfg, obj)?;
            commands::emit(&rep, &cfg)
        }
        Command::Surrogate { objective } => {
            let (args, obj) = objective.split();
            let cfg = run_config_from(args)?;
            let rep = commands::surrogate(&cfg, obj)?;
            commands::emit(&rep, &cfg)
        }
        Command::Simulate { study } => {
            let (args, which) = study.split();
            let document = match &args.config {
                Some(path) => config::load_document(path)?,
                None => config::parse_document("kind = \"study\"")?,
            };
            let cfg = RunConfig {
                document,
                out: args.out.clone(),
                svg: args.svg.clone(),
                seed: args.seed,
                fast: args.fast,
                gamma: args.gamma,
                delta: args.delta,
            };
            let mut rep = commands::simulate(&cfg, which)?;
            rep.meta("resolved_seed", commands::resolved_seed(&cfg));
            commands::emit(&rep, &cfg)
        }
        Command::Validate(args) => {
            let document = config::load_document(&args.config)?;
            match &document {
                config::Document::Portfolio(p) => {
                    println!("OK: portfolio with {} experiments", p.experiments.len());
                }
                config::Document::Study(_) => println!("OK: study document"),
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
