//! Monte Carlo study harness: pilot-draw simulation, policy comparison
//! (naive plug-in, oracle robust correction, data-dependent robust
//! correction), and the sweep tables behind the built-in studies.
//!
//! Determinism contract: every replicate draws from its own counter
//! stream derived from (master seed, replicate index), and aggregation
//! order is fixed by replicate index, so results are bit-identical
//! regardless of the parallelism degree.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pair::{self, PairInstance};
use crate::power;
use crate::report::{SimulationReport, Table};
use crate::robust::{self, SurrogateObjective};
use crate::util;

/// Allocation policies compared by the unknown-sigma studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    /// Pilot estimates used as if exact (all corrections equal one).
    Naive,
    /// Robust corrections tuned with the true sigmas, applied to the
    /// pilot estimates.
    OracleSurrogate,
    /// Fully data-dependent robust corrections from the pilot estimates.
    SurrogateS,
}

impl Policy {
    pub fn as_str(self) -> &'static str {
        match self {
            Policy::Naive => "naive",
            Policy::OracleSurrogate => "oracle_surrogate",
            Policy::SurrogateS => "surrogate_s",
        }
    }

    pub fn all() -> &'static [Policy] {
        &[Policy::Naive, Policy::OracleSurrogate, Policy::SurrogateS]
    }
}

/// How each replicate obtains its portfolio.
#[derive(Debug, Clone)]
pub enum PortfolioGenerator {
    Fixed { sigmas: Vec<f64>, deltas: Vec<f64> },
    Random { m: usize, sigma_range: (f64, f64), delta_range: (f64, f64) },
}

impl PortfolioGenerator {
    fn validate(&self, op: &'static str) -> Result<()> {
        match self {
            PortfolioGenerator::Fixed { sigmas, deltas } => {
                if sigmas.is_empty() || sigmas.len() != deltas.len() {
                    return Err(Error::precondition(op, "fixed portfolio needs matching nonempty sigma/delta lists"));
                }
            }
            PortfolioGenerator::Random { m, sigma_range, delta_range } => {
                if *m == 0 {
                    return Err(Error::precondition(op, "portfolio size must be positive"));
                }
                for (lo, hi) in [sigma_range, delta_range] {
                    if !(*lo > 0.0 && hi >= lo) {
                        return Err(Error::precondition(
                            op,
                            format!("ranges need positive lower bounds, got [{lo}, {hi}]"),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
        match self {
            PortfolioGenerator::Fixed { sigmas, deltas } => (sigmas.clone(), deltas.clone()),
            PortfolioGenerator::Random { m, sigma_range, delta_range } => {
                let mut sigmas = Vec::with_capacity(*m);
                let mut deltas = Vec::with_capacity(*m);
                for _ in 0..*m {
                    sigmas.push(rng.random_range(sigma_range.0..=sigma_range.1));
                    deltas.push(rng.random_range(delta_range.0..=delta_range.1));
                }
                (sigmas, deltas)
            }
        }
    }
}

/// Study parameters. Field use depends on the study: `grid` carries the
/// budget sweep (known-sigma comparison), the difficulty-ratio sweep
/// points, or is unused; `epsilon_set` is only read by the
/// expectation-ratio sweep.
#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub generator: PortfolioGenerator,
    pub replicates: usize,
    pub seed: u64,
    pub budget: f64,
    pub alpha: f64,
    pub epsilon: u32,
    pub grid: Vec<f64>,
    pub gamma_grid: Vec<f64>,
    pub delta_grid: Vec<f64>,
    pub epsilon_set: Vec<u32>,
    pub gamma: f64,
    pub delta_tol: f64,
    pub policies: Vec<Policy>,
}

/// Seed used when a study does not specify one, so repeated invocations
/// agree by default.
pub const DEFAULT_SEED: u64 = 42;

impl StudyConfig {
    /// Known-sigma comparison defaults: 50 experiments, sigma in
    /// [0.5, 2], gap in [0.01, 1], alpha 0.05, budget sweep to 200k.
    pub fn known_sigma_default() -> Self {
        StudyConfig {
            generator: PortfolioGenerator::Random {
                m: 50,
                sigma_range: (0.5, 2.0),
                delta_range: (0.01, 1.0),
            },
            replicates: 1000,
            seed: DEFAULT_SEED,
            budget: 80_000.0,
            alpha: 0.05,
            epsilon: 20,
            grid: vec![
                5_000.0, 10_000.0, 20_000.0, 40_000.0, 80_000.0, 120_000.0, 160_000.0, 200_000.0,
            ],
            gamma_grid: vec![],
            delta_grid: vec![],
            epsilon_set: vec![],
            gamma: 0.7,
            delta_tol: 0.2,
            policies: Policy::all().to_vec(),
        }
    }

    /// Unknown-sigma study defaults: 20 experiments, budget 2000,
    /// pilot size 20, sigma in [0.5, 2], gap in [0.1, 1], alpha 0.05,
    /// 1000 replicates, coverage target 0.7, tolerance target 0.2.
    /// The budget puts the portfolio in the resource-constrained regime
    /// where correction policies actually separate; generous budgets
    /// compress every policy toward zero excess error.
    pub fn unknown_sigma_default() -> Self {
        StudyConfig {
            generator: PortfolioGenerator::Random {
                m: 20,
                sigma_range: (0.5, 2.0),
                delta_range: (0.1, 1.0),
            },
            replicates: 1000,
            seed: DEFAULT_SEED,
            budget: 2000.0,
            alpha: 0.05,
            epsilon: 20,
            grid: vec![],
            gamma_grid: vec![],
            delta_grid: vec![],
            epsilon_set: vec![],
            gamma: 0.7,
            delta_tol: 0.2,
            policies: Policy::all().to_vec(),
        }
    }

    /// Two-experiment ratio sweep defaults (budget 200, pilot size 20):
    /// difficulty ratios on a log grid, coverage and tolerance grids for
    /// the closed-form criteria, pilot sizes for the expectation sweep.
    pub fn pair_sweep_default() -> Self {
        StudyConfig {
            generator: PortfolioGenerator::Fixed { sigmas: vec![1.0, 1.0], deltas: vec![1.0, 1.0] },
            replicates: 1,
            seed: DEFAULT_SEED,
            budget: 200.0,
            alpha: 0.05,
            epsilon: 20,
            grid: util::geomspace(0.2, 5.0, 25),
            gamma_grid: vec![0.5, 0.6, 0.7, 0.8, 0.9],
            delta_grid: vec![0.05, 0.1, 0.15, 0.2, 0.3],
            epsilon_set: vec![20, 50, 100, 500],
            gamma: 0.7,
            delta_tol: 0.2,
            policies: vec![],
        }
    }

    fn replicate_rng(&self, replicate: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(replicate as u64 + 1);
        rng
    }
}

/// Draw a pilot sample standard deviation: S = σ sqrt(Y/(ε-1)) with
/// Y chi-squared on ε-1 degrees of freedom, so E\[S²\] = σ².
pub fn sample_pilot_sd(sigma: f64, epsilon: u32, rng: &mut impl Rng) -> f64 {
    assert!(sigma > 0.0 && epsilon >= 2, "pilot draws need sigma > 0 and epsilon >= 2");
    let nu = f64::from(epsilon - 1);
    let chi = ChiSquared::new(nu).expect("valid degrees of freedom");
    sigma * (chi.sample(rng) / nu).sqrt()
}

// ---------------------------------------------------------------------------
// Known-sigma comparison (budget sweep)
// ---------------------------------------------------------------------------

/// For every budget in the grid and every replicate, compare the
/// worst-case Type-2 error of the power-optimal and MSE-optimal
/// allocations. Emits a `replicates` table and a per-budget `summary`.
pub fn compare_known_sigma(cfg: &StudyConfig) -> Result<SimulationReport> {
    const OP: &str = "compare_known_sigma";
    cfg.generator.validate(OP)?;
    if cfg.grid.is_empty() {
        return Err(Error::precondition(OP, "empty budget grid"));
    }
    for &budget in &cfg.grid {
        if !(budget.is_finite() && budget > 0.0) {
            return Err(Error::precondition(OP, format!("budgets must be positive, got {budget}")));
        }
    }
    if cfg.replicates == 0 {
        return Err(Error::precondition(OP, "replicates must be >= 1"));
    }

    let per_rep: Vec<Vec<[f64; 4]>> = (0..cfg.replicates)
        .into_par_iter()
        .map(|rep| {
            let mut rng = cfg.replicate_rng(rep);
            let (sigmas, deltas) = cfg.generator.draw(&mut rng);
            let difficulties: Vec<f64> =
                sigmas.iter().zip(&deltas).map(|(s, d)| (s / d).powi(2)).collect();
            let variances: Vec<f64> = sigmas.iter().map(|s| s * s).collect();
            let var_total: f64 = variances.iter().sum();
            cfg.grid
                .iter()
                .map(|&budget| {
                    let beta_power =
                        power::optimal_max_type2_from(&difficulties, budget, cfg.alpha)
                            .expect("validated inputs");
                    // worst error under the variance-proportional split
                    let beta_mse = sigmas
                        .iter()
                        .zip(&deltas)
                        .zip(&variances)
                        .map(|((s, d), v)| {
                            power::type2_error(*s, budget * v / var_total, *d, cfg.alpha)
                                .expect("validated inputs")
                        })
                        .fold(f64::NEG_INFINITY, f64::max);
                    [rep as f64, budget, beta_power, beta_mse]
                })
                .collect()
        })
        .collect();

    let mut replicates = Table::new("replicates", &["replicate", "n_budget", "beta_power", "beta_mse", "gap"]);
    for rows in &per_rep {
        for &[rep, budget, bp, bm] in rows {
            replicates.push(vec![rep, budget, bp, bm, bm - bp]);
        }
    }
    let mut summary = Table::new("summary", &["n_budget", "mean_beta_power", "mean_beta_mse", "mean_gap"]);
    for (gi, &budget) in cfg.grid.iter().enumerate() {
        let powers: Vec<f64> = per_rep.iter().map(|rows| rows[gi][2]).collect();
        let mses: Vec<f64> = per_rep.iter().map(|rows| rows[gi][3]).collect();
        let gaps: Vec<f64> = powers.iter().zip(&mses).map(|(p, m)| m - p).collect();
        summary.push(vec![budget, util::mean(&powers), util::mean(&mses), util::mean(&gaps)]);
    }

    let mut report = SimulationReport::default();
    report.meta("study", "known_sigma_comparison");
    report.meta("seed", cfg.seed);
    report.meta("replicates", cfg.replicates);
    report.meta("alpha", cfg.alpha);
    report.tables.push(summary);
    report.tables.push(replicates);
    Ok(report)
}

// ---------------------------------------------------------------------------
// Unknown-sigma policy comparison
// ---------------------------------------------------------------------------

/// One replicate of the policy comparison: draw a portfolio and pilots,
/// then measure each policy's realized worst-case error in excess of
/// the known-sigma optimum.
fn unknown_sigma_replicate(
    cfg: &StudyConfig,
    objective: &SurrogateObjective,
    rep: usize,
) -> Result<Vec<f64>> {
    let mut rng = cfg.replicate_rng(rep);
    let (sigmas, deltas) = cfg.generator.draw(&mut rng);
    let m = sigmas.len();
    let difficulties_true: Vec<f64> =
        sigmas.iter().zip(&deltas).map(|(s, d)| (s / d).powi(2)).collect();
    let epsilons = vec![cfg.epsilon; m];
    let beta_star = power::optimal_max_type2_from(&difficulties_true, cfg.budget, cfg.alpha)?;
    let pilots: Vec<f64> =
        sigmas.iter().map(|&s| sample_pilot_sd(s, cfg.epsilon, &mut rng)).collect();

    let mut row = vec![rep as f64];
    for policy in &cfg.policies {
        let k = match policy {
            Policy::Naive => vec![1.0; m],
            Policy::OracleSurrogate => {
                solve_objective(&difficulties_true, &epsilons, cfg, objective, beta_star)?.k
            }
            Policy::SurrogateS => {
                let (plan, _) = robust::surrogate_pipeline(
                    &pilots,
                    &epsilons,
                    &deltas,
                    cfg.budget,
                    cfg.alpha,
                    *objective,
                )?;
                plan.k
            }
        };
        let realized = power::realized_max_type2(
            &k,
            &pilots,
            &sigmas,
            &deltas,
            cfg.budget,
            cfg.alpha,
        )?;
        row.push(realized - beta_star);
    }
    Ok(row)
}

fn solve_objective(
    difficulties: &[f64],
    epsilons: &[u32],
    cfg: &StudyConfig,
    objective: &SurrogateObjective,
    beta_star: f64,
) -> Result<robust::CorrectionPlan> {
    match objective {
        SurrogateObjective::Tolerance { gamma } => {
            robust::solve_tolerance(difficulties, epsilons, *gamma, cfg.budget, cfg.alpha)
        }
        SurrogateObjective::Confidence { delta } => {
            robust::solve_confidence(difficulties, epsilons, *delta, cfg.budget, cfg.alpha, beta_star)
        }
        SurrogateObjective::Expectation => {
            robust::solve_expectation(difficulties, epsilons, cfg.budget, cfg.alpha)
        }
    }
}

/// Policy comparison under pilot uncertainty. Per replicate: draw a
/// portfolio and pilot estimates, compute each configured policy's
/// corrections and allocation, and record the realized worst-case error
/// in excess of the known-sigma optimum. The summary row carries, per
/// policy, the mean excess, the 70th-percentile excess, and the
/// fraction of replicates within the tolerance target.
pub fn compare_unknown_sigma(
    cfg: &StudyConfig,
    objective: &SurrogateObjective,
) -> Result<SimulationReport> {
    const OP: &str = "compare_unknown_sigma";
    cfg.generator.validate(OP)?;
    if cfg.replicates == 0 {
        return Err(Error::precondition(OP, "replicates must be >= 1"));
    }
    if cfg.policies.is_empty() {
        return Err(Error::precondition(OP, "no policies configured"));
    }
    if cfg.epsilon < 2 {
        return Err(Error::precondition(OP, format!("pilot size must be >= 2, got {}", cfg.epsilon)));
    }

    let rows: Result<Vec<Vec<f64>>> = (0..cfg.replicates)
        .into_par_iter()
        .map(|rep| unknown_sigma_replicate(cfg, objective, rep))
        .collect();
    let rows = rows?;

    let mut columns = vec!["replicate".to_string()];
    for p in &cfg.policies {
        columns.push(format!("excess_{}", p.as_str()));
    }
    let column_refs: Vec<&str> = columns.iter().map(|s| s.as_str()).collect();
    let mut replicates = Table::new("replicates", &column_refs);
    for row in rows {
        replicates.push(row);
    }

    let mut summary_cols = Vec::new();
    let mut summary_row = Vec::new();
    for (pi, p) in cfg.policies.iter().enumerate() {
        let excess: Vec<f64> = replicates.rows.iter().map(|r| r[pi + 1]).collect();
        summary_cols.push(format!("mean_{}", p.as_str()));
        summary_row.push(util::mean(&excess));
        summary_cols.push(format!("p70_{}", p.as_str()));
        summary_row.push(util::percentile(&excess, 70.0));
        summary_cols.push(format!("within_delta_{}", p.as_str()));
        let within = excess.iter().filter(|&&e| e <= cfg.delta_tol).count();
        summary_row.push(within as f64 / excess.len() as f64);
    }
    let summary_refs: Vec<&str> = summary_cols.iter().map(|s| s.as_str()).collect();
    let mut summary = Table::new("summary", &summary_refs);
    summary.push(summary_row);

    let mut report = SimulationReport::default();
    report.meta("study", "unknown_sigma_comparison");
    report.meta("objective", objective.kind().as_str());
    match objective {
        SurrogateObjective::Tolerance { gamma } => report.meta("gamma", gamma),
        SurrogateObjective::Confidence { delta } => {
            report.meta("delta", delta);
            report.meta("beta_star_proxy", "plug-in optimum from pilot estimates");
        }
        SurrogateObjective::Expectation => {}
    }
    report.meta("seed", cfg.seed);
    report.meta("replicates", cfg.replicates);
    report.meta("epsilon", cfg.epsilon);
    report.meta("budget", cfg.budget);
    report.meta("alpha", cfg.alpha);
    report.meta("within_delta_threshold", cfg.delta_tol);
    report.tables.push(summary);
    report.tables.push(replicates);
    Ok(report)
}

// ---------------------------------------------------------------------------
// Two-experiment ratio sweeps
// ---------------------------------------------------------------------------

/// Optimal inflation ratio under the expectation criterion as a
/// function of the difficulty ratio, one curve per pilot size.
pub fn expectation_ratio_sweep(cfg: &StudyConfig) -> Result<SimulationReport> {
    const OP: &str = "expectation_ratio_sweep";
    if cfg.grid.is_empty() || cfg.epsilon_set.is_empty() {
        return Err(Error::precondition(OP, "needs a ratio grid and a pilot-size set"));
    }
    let cells: Result<Vec<Vec<f64>>> = cfg
        .epsilon_set
        .par_iter()
        .flat_map(|&eps| {
            cfg.grid.par_iter().map(move |&ratio| {
                let inst = PairInstance::new(ratio, 1.0, eps, cfg.budget, cfg.alpha)?;
                let opt = pair::expectation_optimum(&inst)?;
                Ok(vec![ratio, f64::from(eps), opt.r_star])
            })
        })
        .collect();
    let mut table = Table::new("exp_sweep", &["difficulty_ratio", "epsilon", "r_star"]);
    let mut rows = cells?;
    rows.sort_by(|a, b| (a[1], a[0]).partial_cmp(&(b[1], b[0])).expect("finite"));
    for row in rows {
        table.push(row);
    }
    let mut report = SimulationReport::default();
    report.meta("study", "expectation_ratio_sweep");
    report.meta("budget", cfg.budget);
    report.meta("alpha", cfg.alpha);
    report.tables.push(table);
    Ok(report)
}

/// Optimal inflation ratio surfaces for the tolerance criterion (over
/// coverage targets) and the confidence criterion (over tolerance
/// targets), each against the difficulty ratio.
pub fn tol_conf_ratio_sweep(cfg: &StudyConfig) -> Result<SimulationReport> {
    const OP: &str = "tol_conf_ratio_sweep";
    if cfg.grid.is_empty() || cfg.gamma_grid.is_empty() || cfg.delta_grid.is_empty() {
        return Err(Error::precondition(OP, "needs ratio, gamma, and delta grids"));
    }
    let mut tol_table = Table::new("tol_sweep", &["difficulty_ratio", "gamma", "r_star"]);
    for &ratio in &cfg.grid {
        let inst = PairInstance::new(ratio, 1.0, cfg.epsilon, cfg.budget, cfg.alpha)?;
        for &gamma in &cfg.gamma_grid {
            let opt = pair::tolerance_optimum(gamma, &inst)?;
            tol_table.push(vec![ratio, gamma, opt.r_star]);
        }
    }
    let mut conf_table = Table::new("conf_sweep", &["difficulty_ratio", "delta", "r_star"]);
    for &ratio in &cfg.grid {
        let inst = PairInstance::new(ratio, 1.0, cfg.epsilon, cfg.budget, cfg.alpha)?;
        let beta_star = inst.optimal_beta()?;
        for &delta in &cfg.delta_grid {
            let opt = pair::confidence_optimum(delta, &inst, beta_star)?;
            conf_table.push(vec![ratio, delta, opt.r_star]);
        }
    }
    let mut report = SimulationReport::default();
    report.meta("study", "tolerance_confidence_ratio_sweep");
    report.meta("budget", cfg.budget);
    report.meta("epsilon", cfg.epsilon);
    report.meta("alpha", cfg.alpha);
    report.tables.push(tol_table);
    report.tables.push(conf_table);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pilot_sd_is_unbiased_in_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let draws = 1_000_000;
        let mut sum_sq = 0.0;
        let mut below = 0u64;
        for _ in 0..draws {
            let s = sample_pilot_sd(2.0, 20, &mut rng);
            sum_sq += s * s;
            if s < 2.0 {
                below += 1;
            }
        }
        let mean_sq = sum_sq / draws as f64;
        assert!((mean_sq - 4.0).abs() < 0.02, "E[S^2] = {mean_sq}");
        // the estimate underestimates sigma more than half the time
        assert!(below as f64 / draws as f64 > 0.5);
    }

    #[test]
    fn pilot_sd_deterministic_per_seed() {
        let a: Vec<f64> = {
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            (0..5).map(|_| sample_pilot_sd(1.0, 10, &mut rng)).collect()
        };
        let b: Vec<f64> = {
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            (0..5).map(|_| sample_pilot_sd(1.0, 10, &mut rng)).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn known_sigma_study_dominance_and_limits() {
        let mut cfg = StudyConfig::known_sigma_default();
        cfg.replicates = 20;
        cfg.grid = vec![100.0, 50_000.0, 5_000_000.0];
        let report = compare_known_sigma(&cfg).unwrap();
        let reps = report.table("replicates").unwrap();
        let gap_idx = reps.columns.iter().position(|c| c == "gap").unwrap();
        for row in &reps.rows {
            assert!(row[gap_idx] >= -1e-12, "dominance violated: {row:?}");
        }
        let summary = report.table("summary").unwrap();
        // tiny budget: both near 1 - alpha; huge budget: both near 0
        assert!(summary.rows[0][1] > 0.90 && summary.rows[0][2] > 0.90);
        assert!(summary.rows[2][1] < 0.05);
    }

    #[test]
    fn known_sigma_study_rejects_empty_grid() {
        let mut cfg = StudyConfig::known_sigma_default();
        cfg.grid.clear();
        assert!(compare_known_sigma(&cfg).is_err());
    }

    #[test]
    fn known_sigma_study_is_deterministic() {
        let mut cfg = StudyConfig::known_sigma_default();
        cfg.replicates = 8;
        cfg.grid = vec![10_000.0];
        let a = compare_known_sigma(&cfg).unwrap();
        let b = compare_known_sigma(&cfg).unwrap();
        assert_eq!(a.table("replicates").unwrap().rows, b.table("replicates").unwrap().rows);
    }

    #[test]
    fn unknown_sigma_study_realized_excess_nonnegative() {
        let mut cfg = StudyConfig::unknown_sigma_default();
        cfg.replicates = 12;
        let report =
            compare_unknown_sigma(&cfg, &SurrogateObjective::Tolerance { gamma: 0.7 }).unwrap();
        let reps = report.table("replicates").unwrap();
        for row in &reps.rows {
            for &x in &row[1..] {
                assert!(x >= -1e-12, "negative excess: {x}");
            }
        }
        assert_eq!(reps.rows.len(), 12);
    }

    #[test]
    fn unknown_sigma_oracle_with_huge_pilots_has_tiny_excess() {
        let mut cfg = StudyConfig::unknown_sigma_default();
        cfg.replicates = 12;
        cfg.epsilon = 1_000_000;
        cfg.policies = vec![Policy::OracleSurrogate];
        let report =
            compare_unknown_sigma(&cfg, &SurrogateObjective::Tolerance { gamma: 0.7 }).unwrap();
        let reps = report.table("replicates").unwrap();
        for row in &reps.rows {
            assert!(row[1] < 0.01, "excess {} too large for huge pilots", row[1]);
        }
    }

    #[test]
    fn expectation_sweep_unit_ratio_curve() {
        let mut cfg = StudyConfig::pair_sweep_default();
        cfg.grid = vec![0.5, 1.0, 2.0];
        cfg.epsilon_set = vec![20, 500];
        let report = expectation_ratio_sweep(&cfg).unwrap();
        let table = report.table("exp_sweep").unwrap();
        for row in &table.rows {
            let (ratio, eps, r_star) = (row[0], row[1], row[2]);
            if (ratio - 1.0).abs() < 1e-12 {
                assert!((r_star - 1.0).abs() < 1e-3, "eps={eps}: r* = {r_star} at ratio 1");
            }
            if ratio < 1.0 {
                assert!(r_star > 1.0, "eps={eps} ratio={ratio}: r* = {r_star}");
            }
            if ratio > 1.0 {
                assert!(r_star < 1.0, "eps={eps} ratio={ratio}: r* = {r_star}");
            }
        }
    }

    #[test]
    fn tol_conf_sweep_shapes() {
        let mut cfg = StudyConfig::pair_sweep_default();
        cfg.grid = vec![0.5, 1.0, 2.0];
        cfg.gamma_grid = vec![0.6, 0.8];
        cfg.delta_grid = vec![0.1, 0.2];
        let report = tol_conf_ratio_sweep(&cfg).unwrap();
        let tol = report.table("tol_sweep").unwrap();
        assert_eq!(tol.rows.len(), 6);
        for row in &tol.rows {
            if (row[0] - 1.0).abs() < 1e-12 {
                assert!((row[2] - 1.0).abs() < 1e-10);
            }
        }
        // an easier first experiment is inflated more as the targets grow
        let row_at = |t: &crate::report::Table, ratio: f64, y: f64| {
            t.rows
                .iter()
                .find(|r| r[0] == ratio && r[1] == y)
                .map(|r| r[2])
                .unwrap()
        };
        assert!(row_at(tol, 0.5, 0.8) >= row_at(tol, 0.5, 0.6));
        assert!(row_at(tol, 2.0, 0.8) <= row_at(tol, 2.0, 0.6));
        let conf = report.table("conf_sweep").unwrap();
        assert_eq!(conf.rows.len(), 6);
        assert!(row_at(conf, 0.5, 0.2) >= row_at(conf, 0.5, 0.1));
        assert!(row_at(conf, 2.0, 0.2) <= row_at(conf, 2.0, 0.1));
    }
}
