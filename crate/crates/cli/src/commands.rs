//! Command implementations: each builds a report from the core library
//! and emits it to stdout, CSV, and optionally SVG.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};

use powerplan::pair::{self, PairInstance};
use powerplan::power;
use powerplan::report::{self, SimulationReport, Table};
use powerplan::robust::{self, SurrogateObjective};
use powerplan::sim::{self, StudyConfig, DEFAULT_SEED};

use crate::config::{Document, PortfolioDoc, StudyDoc};

/// Resolved invocation: the validated document plus output options.
pub struct RunConfig {
    pub document: Document,
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub seed: Option<u64>,
    pub fast: bool,
    pub gamma: Option<f64>,
    pub delta: Option<f64>,
}

/// Fast-mode replicate count for the simulation studies.
const FAST_REPLICATES: usize = 200;

fn portfolio_doc(config: &RunConfig) -> Result<&PortfolioDoc> {
    match &config.document {
        Document::Portfolio(p) => Ok(p),
        Document::Study(_) => bail!("this command needs a portfolio document (kind = \"portfolio\")"),
    }
}

fn study_doc(config: &RunConfig) -> Option<&StudyDoc> {
    match &config.document {
        Document::Study(s) => Some(s),
        Document::Portfolio(_) => None,
    }
}

// ---------------------------------------------------------------------------
// allocate / mse
// ---------------------------------------------------------------------------

pub fn allocate(config: &RunConfig, mse: bool) -> Result<SimulationReport> {
    let doc = portfolio_doc(config)?;
    let portfolio = doc.to_portfolio()?;
    let alloc = if mse {
        power::mse_optimal_allocation(&portfolio)?
    } else {
        power::power_optimal_allocation(&portfolio)?
    };
    let sigmas = portfolio.known_sigmas()?;
    let mut table = Table::new("allocation", &["index", "sigma", "delta", "n", "beta"]);
    for (i, e) in portfolio.experiments.iter().enumerate() {
        table.push(vec![
            i as f64,
            sigmas[i],
            e.delta_gap,
            alloc.n[i],
            alloc.per_experiment_beta[i],
        ]);
    }
    let mut rep = SimulationReport::default();
    rep.meta("command", if mse { "mse" } else { "allocate" });
    rep.meta("budget", portfolio.budget);
    rep.meta("alpha", portfolio.alpha);
    rep.meta("max_beta", report::format_float(alloc.max_beta));
    rep.tables.push(table);
    Ok(rep)
}

// ---------------------------------------------------------------------------
// two-exp
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    Tol,
    Conf,
    Exp,
}

impl Objective {
    pub fn as_str(self) -> &'static str {
        match self {
            Objective::Tol => "tol",
            Objective::Conf => "conf",
            Objective::Exp => "exp",
        }
    }
}

fn pair_instance(doc: &PortfolioDoc) -> Result<PairInstance> {
    if doc.experiments.len() != 2 {
        bail!("two-exp needs exactly 2 experiments, got {}", doc.experiments.len());
    }
    let mut a = [0.0; 2];
    let mut eps = [0u32; 2];
    for (i, e) in doc.experiments.iter().enumerate() {
        let sigma = e
            .sigma
            .ok_or_else(|| anyhow!("experiment {i}: two-exp needs a known sigma"))?;
        a[i] = power::difficulty_index(sigma, e.delta);
        eps[i] = e
            .pilot_epsilon
            .ok_or_else(|| anyhow!("experiment {i}: two-exp needs pilot_epsilon"))?;
    }
    if eps[0] != eps[1] {
        bail!("two-exp needs identical pilot sizes, got {} and {}", eps[0], eps[1]);
    }
    PairInstance::new(a[0], a[1], eps[0], doc.budget, doc.alpha).map_err(|e| anyhow!(e))
}

pub fn two_exp(config: &RunConfig, objective: Objective) -> Result<SimulationReport> {
    let doc = portfolio_doc(config)?;
    let inst = pair_instance(doc)?;
    let beta_star = inst.optimal_beta()?;
    let mut rep = SimulationReport::default();
    rep.meta("command", "two-exp");
    rep.meta("objective", objective.as_str());
    rep.meta("budget", inst.budget);
    rep.meta("alpha", inst.alpha);
    rep.meta("beta_star", report::format_float(beta_star));
    let (columns, row): (Vec<&str>, Vec<f64>) = match objective {
        Objective::Tol => {
            let gamma = config.gamma.unwrap_or(0.9);
            rep.meta("gamma", gamma);
            let opt = pair::tolerance_optimum(gamma, &inst)?;
            (
                vec!["a1", "a2", "epsilon", "r_star", "d_star", "delta_star"],
                vec![
                    inst.a1,
                    inst.a2,
                    f64::from(inst.epsilon),
                    opt.r_star,
                    opt.d_star.expect("tolerance optimum has a threshold"),
                    opt.objective,
                ],
            )
        }
        Objective::Conf => {
            let delta = config.delta.unwrap_or(0.2);
            rep.meta("delta", delta);
            let opt = pair::confidence_optimum(delta, &inst, beta_star)?;
            (
                vec!["a1", "a2", "epsilon", "r_star", "d_star", "gamma_star"],
                vec![
                    inst.a1,
                    inst.a2,
                    f64::from(inst.epsilon),
                    opt.r_star,
                    opt.d_star.expect("confidence optimum has a threshold"),
                    opt.objective,
                ],
            )
        }
        Objective::Exp => {
            let opt = pair::expectation_optimum(&inst)?;
            (
                vec!["a1", "a2", "epsilon", "r_star", "expected_max_beta"],
                vec![inst.a1, inst.a2, f64::from(inst.epsilon), opt.r_star, opt.objective],
            )
        }
    };
    let mut table = Table::new("two_exp", &columns);
    table.push(row);
    rep.tables.push(table);
    Ok(rep)
}

// ---------------------------------------------------------------------------
// surrogate
// ---------------------------------------------------------------------------

pub fn surrogate(config: &RunConfig, objective: Objective) -> Result<SimulationReport> {
    let doc = portfolio_doc(config)?;
    let mut pilots = Vec::new();
    let mut epsilons = Vec::new();
    let mut deltas = Vec::new();
    for (i, e) in doc.experiments.iter().enumerate() {
        let s = e
            .pilot_s
            .ok_or_else(|| anyhow!("experiment {i}: surrogate needs pilot_s"))?;
        let eps = e
            .pilot_epsilon
            .ok_or_else(|| anyhow!("experiment {i}: surrogate needs pilot_epsilon"))?;
        pilots.push(s);
        epsilons.push(eps);
        deltas.push(e.delta);
    }
    let mut rep = SimulationReport::default();
    rep.meta("command", "surrogate");
    rep.meta("objective", objective.as_str());
    rep.meta("budget", doc.budget);
    rep.meta("alpha", doc.alpha);
    let surrogate_objective = match objective {
        Objective::Tol => {
            let gamma = config.gamma.unwrap_or(0.7);
            rep.meta("gamma", gamma);
            SurrogateObjective::Tolerance { gamma }
        }
        Objective::Conf => {
            let delta = config.delta.unwrap_or(0.2);
            rep.meta("delta", delta);
            rep.meta("beta_star_proxy", "plug-in optimum from pilot estimates");
            SurrogateObjective::Confidence { delta }
        }
        Objective::Exp => SurrogateObjective::Expectation,
    };
    let (plan, alloc) = robust::surrogate_pipeline(
        &pilots,
        &epsilons,
        &deltas,
        doc.budget,
        doc.alpha,
        surrogate_objective,
    )?;
    match objective {
        Objective::Tol => rep.meta("delta_r", report::format_float(plan.objective_value)),
        Objective::Conf => rep.meta("gamma_r", report::format_float(plan.objective_value)),
        Objective::Exp => rep.meta("expected_bound", report::format_float(plan.objective_value)),
    }
    rep.meta("certified_gamma", report::format_float(plan.certified_gamma));
    rep.meta("design_max_beta", report::format_float(alloc.max_beta));
    let normalized = plan.normalized_k();
    let mut table =
        Table::new("surrogate_plan", &["index", "s", "epsilon", "c", "k", "n", "k_ratio"]);
    for i in 0..pilots.len() {
        table.push(vec![
            i as f64,
            pilots[i],
            f64::from(epsilons[i]),
            plan.c[i],
            plan.k[i],
            alloc.n[i],
            normalized[i],
        ]);
    }
    rep.tables.push(table);
    Ok(rep)
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Study {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
}

impl Study {
    pub fn from_name(name: &str) -> Result<Self> {
        Ok(match name {
            "fig1" => Study::Fig1,
            "fig2" => Study::Fig2,
            "fig3" => Study::Fig3,
            "fig4" => Study::Fig4,
            "fig5" => Study::Fig5,
            "fig6" => Study::Fig6,
            other => bail!("unknown study {other:?}; expected fig1..fig6"),
        })
    }

    fn base_config(self) -> StudyConfig {
        match self {
            Study::Fig1 => StudyConfig::known_sigma_default(),
            Study::Fig2 | Study::Fig3 => StudyConfig::pair_sweep_default(),
            Study::Fig4 | Study::Fig5 | Study::Fig6 => StudyConfig::unknown_sigma_default(),
        }
    }
}

pub fn simulate(config: &RunConfig, study: Option<Study>) -> Result<SimulationReport> {
    let doc = study_doc(config);
    let study = match (study, doc) {
        (Some(s), _) => s,
        (None, Some(d)) => {
            let name = d
                .study
                .as_deref()
                .ok_or_else(|| anyhow!("simulate custom needs a `study` key in the config"))?;
            Study::from_name(name)?
        }
        (None, None) => bail!("simulate custom needs --config with a study document"),
    };
    let mut cfg = study.base_config();
    if let Some(d) = doc {
        cfg = d.apply_to(cfg)?;
    }
    if let Some(seed) = config.seed {
        cfg.seed = seed;
    }
    if config.fast {
        cfg.replicates = cfg.replicates.min(FAST_REPLICATES);
    }
    let mut rep = match study {
        Study::Fig1 => sim::compare_known_sigma(&cfg)?,
        Study::Fig2 => sim::tol_conf_ratio_sweep(&cfg)?,
        Study::Fig3 => sim::expectation_ratio_sweep(&cfg)?,
        Study::Fig4 => {
            sim::compare_unknown_sigma(&cfg, &SurrogateObjective::Tolerance { gamma: cfg.gamma })?
        }
        Study::Fig5 => sim::compare_unknown_sigma(
            &cfg,
            &SurrogateObjective::Confidence { delta: cfg.delta_tol },
        )?,
        Study::Fig6 => sim::compare_unknown_sigma(&cfg, &SurrogateObjective::Expectation)?,
    };
    rep.meta("fast", config.fast);
    Ok(rep)
}

// ---------------------------------------------------------------------------
// emission
// ---------------------------------------------------------------------------

/// Write the report: the first table goes to `out`, any further tables
/// to `<stem>_<table><ext>`. Without `out`, the primary table is printed
/// to stdout. An SVG of the primary table (or of the excess-error ECDF
/// for policy-comparison reports) is written when requested.
pub fn emit(rep: &SimulationReport, config: &RunConfig) -> Result<()> {
    let primary = rep
        .tables
        .first()
        .ok_or_else(|| anyhow!("internal: report without tables"))?;
    match &config.out {
        Some(path) => {
            report::write_csv(primary, &rep.metadata, path)
                .with_context(|| format!("cannot write {}", path.display()))?;
            for extra in &rep.tables[1..] {
                let side = sibling_path(path, &extra.name);
                report::write_csv(extra, &rep.metadata, &side)
                    .with_context(|| format!("cannot write {}", side.display()))?;
            }
        }
        None => {
            for (k, v) in &rep.metadata {
                println!("# {k} = {v}");
            }
            print_table(primary);
            for extra in &rep.tables[1..] {
                println!();
                println!("## {}", extra.name);
                print_table(extra);
            }
        }
    }
    if let Some(svg_path) = &config.svg {
        let svg = svg_for(rep)
            .ok_or_else(|| anyhow!("no plottable table in this report"))?;
        std::fs::write(svg_path, svg)
            .with_context(|| format!("cannot write {}", svg_path.display()))?;
    }
    Ok(())
}

fn sibling_path(path: &Path, table: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    path.with_file_name(format!("{stem}_{table}.{ext}"))
}

fn print_table(table: &Table) {
    println!("{}", table.columns.join(","));
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(|&x| report::format_float(x)).collect();
        println!("{}", cells.join(","));
    }
}

fn svg_for(rep: &SimulationReport) -> Option<String> {
    let primary = rep.tables.first()?;
    // policy-comparison reports plot the per-policy ECDF of excess error
    if let Some(reps) = rep.table("replicates") {
        if reps.columns.iter().any(|c| c.starts_with("excess_")) {
            let ecdf = excess_ecdf(reps)?;
            return report::render_line_svg(&ecdf, "excess", "excess error ECDF");
        }
    }
    let x_col = primary.columns.first()?.clone();
    report::render_line_svg(primary, &x_col, &primary.name)
}

/// Pool the excess columns onto a common grid of sorted values and
/// tabulate each policy's empirical CDF.
fn excess_ecdf(replicates: &Table) -> Option<Table> {
    let policies: Vec<(usize, String)> = replicates
        .columns
        .iter()
        .enumerate()
        .filter(|(_, c)| c.starts_with("excess_"))
        .map(|(i, c)| (i, c.replace("excess_", "cdf_")))
        .collect();
    if policies.is_empty() || replicates.rows.is_empty() {
        return None;
    }
    let mut grid: Vec<f64> = replicates
        .rows
        .iter()
        .flat_map(|r| policies.iter().map(move |(i, _)| r[*i]))
        .collect();
    grid.sort_by(|a, b| a.partial_cmp(b).expect("finite excess"));
    grid.dedup();
    let names: Vec<&str> = std::iter::once("excess")
        .chain(policies.iter().map(|(_, n)| n.as_str()))
        .collect();
    let mut out = Table::new("excess_ecdf", &names);
    let n = replicates.rows.len() as f64;
    for &x in &grid {
        let mut row = vec![x];
        for (i, _) in &policies {
            let count = replicates.rows.iter().filter(|r| r[*i] <= x).count();
            row.push(count as f64 / n);
        }
        out.push(row);
    }
    Some(out)
}

/// Default seed echoed in metadata when none is given.
pub fn resolved_seed(config: &RunConfig) -> u64 {
    config.seed.unwrap_or(DEFAULT_SEED)
}
