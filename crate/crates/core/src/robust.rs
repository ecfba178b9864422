//! General-portfolio robust surrogates: chi-squared confidence-interval
//! scaling factors, the interval width ratio and its inverse, the
//! deterministic worst-case error bound, the three separable convex
//! programs over per-experiment confidence levels (minimum tolerance,
//! maximum confidence, minimum expected error), and the data-dependent
//! pipeline that turns pilot estimates into correction factors and a
//! final allocation.
//!
//! The convex programs are solved in `x = log c` space by dual descent
//! on the shared KKT marginal: for a trial multiplier every coordinate
//! solves `g'(x_i) a_i = λ` (with `g(x) = κ(ε_i, eˣ)` evaluated through
//! analytic quantile derivatives), and the multiplier is bracketed and
//! refined until the coupling constraint binds to 1e-10.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::{Arc, LazyLock, Mutex};

use crate::error::{Error, Result};
use crate::power::{self, AllocationResult};
use crate::special;
use crate::util;

/// Confidence levels are clamped to this range; the open interval of
/// the exact formulation needs numeric guards at both ends.
pub const C_MIN: f64 = 1e-12;
pub const C_MAX: f64 = 1.0 - 1e-9;

const X_MIN: f64 = -27.631_021_115_928_547; // ln(C_MIN)
const X_MAX: f64 = -1.000_000_082_240_371_6e-9; // ln(C_MAX)

/// Lower and upper scaling factors of the chi-squared confidence
/// interval for a variance at confidence level `c`:
/// `lower = (ε-1)/χ²_{(1+c)/2, ε-1}`, `upper = (ε-1)/χ²_{(1-c)/2, ε-1}`.
/// Both equal the median ratio at `c = 0`.
#[derive(Debug, Clone, Copy)]
pub struct ScalingPair {
    pub lower: f64,
    pub upper: f64,
}

fn check_epsilon(op: &'static str, epsilon: u32) -> Result<f64> {
    if epsilon < 2 {
        return Err(Error::domain(op, format!("pilot size must be >= 2, got {epsilon}")));
    }
    Ok(f64::from(epsilon - 1))
}

fn check_confidence(op: &'static str, c: f64) -> Result<()> {
    if !(c.is_finite() && (0.0..1.0).contains(&c)) {
        return Err(Error::domain(op, format!("confidence level must lie in [0,1), got {c}")));
    }
    Ok(())
}

/// Scaling factors of the variance confidence interval.
pub fn scaling_factors(epsilon: u32, c: f64) -> Result<ScalingPair> {
    const OP: &str = "scaling_factors";
    let nu = check_epsilon(OP, epsilon)?;
    check_confidence(OP, c)?;
    let upper_q = special::chi2_quantile(0.5 * (1.0 + c), nu)?;
    let lower_q = special::chi2_quantile(0.5 * (1.0 - c), nu)?;
    Ok(ScalingPair { lower: nu / upper_q, upper: nu / lower_q })
}

/// Interval width ratio κ(ε, c) = upper/lower scaling factor, i.e. the
/// ratio of the two chi-squared quantiles. Equals 1 exactly at `c = 0`,
/// increases and is convex in `c`, and tends to 1 as ε grows.
pub fn scaling_ratio(epsilon: u32, c: f64) -> Result<f64> {
    const OP: &str = "scaling_ratio";
    let nu = check_epsilon(OP, epsilon)?;
    check_confidence(OP, c)?;
    scaling_ratio_nu(nu, c)
}

fn scaling_ratio_nu(nu: f64, c: f64) -> Result<f64> {
    let upper_q = special::chi2_quantile(0.5 * (1.0 + c), nu)?;
    let lower_q = special::chi2_quantile(0.5 * (1.0 - c), nu)?;
    Ok(upper_q / lower_q)
}

/// Confidence level at which the interval width ratio reaches `target`:
/// the unique `c` with κ(ε, c) = target, found by bracketed iteration.
pub fn scaling_ratio_inverse(epsilon: u32, target: f64) -> Result<f64> {
    const OP: &str = "scaling_ratio_inverse";
    let nu = check_epsilon(OP, epsilon)?;
    if !(target.is_finite() && target > 1.0) {
        return Err(Error::domain(OP, format!("target ratio must exceed 1, got {target}")));
    }
    let at_max = scaling_ratio_nu(nu, C_MAX)?;
    if target >= at_max {
        return Err(Error::numeric(
            OP,
            format!("target {target} unreachable: ratio at the confidence cap is {at_max:.6e}"),
        ));
    }
    let err_cell = RefCell::new(None);
    let f = |c: f64| match scaling_ratio_nu(nu, c) {
        Ok(v) => v,
        Err(e) => {
            *err_cell.borrow_mut() = Some(e);
            f64::NAN
        }
    };
    let c = util::solve_monotone(f, 0.0, C_MAX, 1.0, at_max, target, 1e-15, 1e-10, 200)?;
    if let Some(e) = err_cell.into_inner() {
        return Err(e);
    }
    Ok(c)
}

/// Deterministic worst-case bound on the realized maximum Type-2 error
/// under the robust correction at confidence levels `c`:
/// Φ(q_{1-α} - sqrt(N / Σ κ(ε_i, c_i) a_i)). Reduces to the
/// power-optimal error exactly when every `c_i = 0`.
pub fn worst_case_beta_bound(
    c: &[f64],
    difficulties: &[f64],
    epsilons: &[u32],
    budget: f64,
    alpha: f64,
) -> Result<f64> {
    const OP: &str = "worst_case_beta_bound";
    let m = difficulties.len();
    if c.len() != m || epsilons.len() != m {
        return Err(Error::precondition(
            OP,
            format!("length mismatch: c={}, difficulties={m}, epsilons={}", c.len(), epsilons.len()),
        ));
    }
    let mut inflated = Vec::with_capacity(m);
    for i in 0..m {
        inflated.push(scaling_ratio(epsilons[i], c[i])? * difficulties[i]);
    }
    power::optimal_max_type2_from(&inflated, budget, alpha)
}

/// Which criterion a correction plan certifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveKind {
    /// Minimum tolerance at a target confidence level.
    Tolerance,
    /// Maximum confidence at a fixed tolerance.
    Confidence,
    /// Minimum expected realized worst-case error.
    Expectation,
}

impl ObjectiveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ObjectiveKind::Tolerance => "tol",
            ObjectiveKind::Confidence => "conf",
            ObjectiveKind::Expectation => "exp",
        }
    }
}

/// Objective selector for the surrogate pipeline.
#[derive(Debug, Clone, Copy)]
pub enum SurrogateObjective {
    Tolerance { gamma: f64 },
    Confidence { delta: f64 },
    Expectation,
}

impl SurrogateObjective {
    pub fn kind(&self) -> ObjectiveKind {
        match self {
            SurrogateObjective::Tolerance { .. } => ObjectiveKind::Tolerance,
            SurrogateObjective::Confidence { .. } => ObjectiveKind::Confidence,
            SurrogateObjective::Expectation => ObjectiveKind::Expectation,
        }
    }
}

/// Per-experiment confidence levels with the correction factors they
/// induce (`k_i = upper scaling factor at c_i`), the certified joint
/// coverage Π c_i, and the optimized objective value (δ, γ, or the
/// expected-error bound, depending on `objective_kind`).
#[derive(Debug, Clone)]
pub struct CorrectionPlan {
    pub c: Vec<f64>,
    pub k: Vec<f64>,
    pub objective_kind: ObjectiveKind,
    pub objective_value: f64,
    pub certified_gamma: f64,
}

impl CorrectionPlan {
    fn build(
        c: Vec<f64>,
        epsilons: &[u32],
        objective_kind: ObjectiveKind,
        objective_value: f64,
    ) -> Result<Self> {
        let mut k = Vec::with_capacity(c.len());
        for (&ci, &eps) in c.iter().zip(epsilons) {
            k.push(scaling_factors(eps, ci)?.upper);
        }
        let certified_gamma = c.iter().map(|x| x.ln()).sum::<f64>().exp();
        Ok(CorrectionPlan { c, k, objective_kind, objective_value, certified_gamma })
    }

    /// Correction factors divided by their minimum. Only ratios affect
    /// the allocation, so this form is reported alongside the raw one.
    pub fn normalized_k(&self) -> Vec<f64> {
        let min = self.k.iter().cloned().fold(f64::INFINITY, f64::min);
        self.k.iter().map(|k| k / min).collect()
    }
}

// ---------------------------------------------------------------------------
// Separable dual solver
// ---------------------------------------------------------------------------

/// ln g'(x) where g(x) = κ(ν, eˣ): the log marginal cost of raising one
/// coordinate. dκ/dc is evaluated through quantile derivatives
/// dQ/dp = 1/density(Q(p)), so
/// κ'(c) = 1/(2 f(u) l) + u/(2 f(l) l²) with u, l the upper/lower
/// quantiles. Strictly increasing in x.
fn ln_marginal_cost(nu: f64, x: f64) -> Result<f64> {
    let c = x.exp().clamp(C_MIN, C_MAX);
    let upper = special::chi2_quantile(0.5 * (1.0 + c), nu)?;
    let lower = special::chi2_quantile(0.5 * (1.0 - c), nu)?;
    let f_upper = special::chi2_pdf(upper, nu);
    let f_lower = special::chi2_pdf(lower, nu);
    let kappa_prime = 0.5 / (f_upper * lower) + 0.5 * upper / (f_lower * lower * lower);
    Ok(x + kappa_prime.ln())
}

const COST_TABLE_POINTS: usize = 2048;

/// Tabulated marginal cost of one pilot size: exact ln g'(x) values on a
/// uniform x grid spanning the clamps. Strictly increasing, so the grid
/// both brackets coordinate roots to within one cell and provides a
/// cheap interpolated dual phase. Built once per pilot size per process.
struct CostTable {
    nu: f64,
    xs: Vec<f64>,
    ws: Vec<f64>,
}

impl CostTable {
    fn build(epsilon: u32) -> Result<Self> {
        let nu = check_epsilon("robust solver", epsilon)?;
        // log-spaced in -x: the marginal cost steepens sharply as x -> 0⁻
        // (c -> 1), so cells must shrink there for the bracket to bite
        let mut xs: Vec<f64> = util::geomspace(-X_MAX, -X_MIN, COST_TABLE_POINTS)
            .into_iter()
            .map(|u| -u)
            .collect();
        xs.reverse();
        xs[0] = X_MIN;
        xs[COST_TABLE_POINTS - 1] = X_MAX;
        let mut ws = Vec::with_capacity(COST_TABLE_POINTS);
        for &x in &xs {
            ws.push(ln_marginal_cost(nu, x)?);
        }
        Ok(CostTable { nu, xs, ws })
    }

    fn at_min(&self) -> f64 {
        self.ws[0]
    }

    fn at_max(&self) -> f64 {
        *self.ws.last().expect("nonempty table")
    }

    /// Grid cell whose exact endpoint values bracket `w`.
    fn bracket(&self, w: f64) -> (f64, f64, f64, f64) {
        let idx = self.ws.partition_point(|&v| v < w).clamp(1, self.ws.len() - 1);
        (self.xs[idx - 1], self.xs[idx], self.ws[idx - 1], self.ws[idx])
    }

    /// Interpolated inverse of ln g' (one-cell linear interpolation).
    fn invert_approx(&self, w: f64) -> f64 {
        if w <= self.at_min() {
            return X_MIN;
        }
        if w >= self.at_max() {
            return X_MAX;
        }
        let (xl, xr, wl, wr) = self.bracket(w);
        if wr > wl {
            xl + (w - wl) / (wr - wl) * (xr - xl)
        } else {
            0.5 * (xl + xr)
        }
    }

    /// x solving ln g'(x) = target exactly (to 1e-13), clamped,
    /// warm-started inside the bracketing grid cell.
    fn solve(&self, target: f64, warm: f64, err_cell: &RefCell<Option<Error>>) -> f64 {
        if target <= self.at_min() {
            return X_MIN;
        }
        if target >= self.at_max() {
            return X_MAX;
        }
        let (mut lo, mut hi, mut flo, mut fhi) = self.bracket(target);
        let h = |x: f64| match ln_marginal_cost(self.nu, x) {
            Ok(v) => v,
            Err(e) => {
                *err_cell.borrow_mut() = Some(e);
                f64::NAN
            }
        };
        if warm > lo && warm < hi {
            let fw = h(warm);
            if fw.is_finite() {
                if fw < target {
                    lo = warm;
                    flo = fw;
                } else {
                    hi = warm;
                    fhi = fw;
                }
            }
        }
        util::solve_monotone(h, lo, hi, flo, fhi, target, 1e-13, 1e-13, 120)
            .unwrap_or(0.5 * (lo + hi))
    }
}

static COST_TABLES: LazyLock<Mutex<HashMap<u32, Arc<CostTable>>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

fn cost_table(epsilon: u32) -> Result<Arc<CostTable>> {
    if let Some(t) = COST_TABLES.lock().expect("cost table lock").get(&epsilon) {
        return Ok(Arc::clone(t));
    }
    // built outside the lock: construction is deterministic, so a racing
    // duplicate insert is harmless
    let table = Arc::new(CostTable::build(epsilon)?);
    COST_TABLES
        .lock()
        .expect("cost table lock")
        .entry(epsilon)
        .or_insert_with(|| Arc::clone(&table));
    Ok(table)
}

/// Warm state carried across dual solves that share a problem: the last
/// multiplier and the coordinate roots it produced.
struct DualState {
    ln_lambda: Option<f64>,
    xs: Vec<f64>,
}

impl DualState {
    fn cold(m: usize) -> Self {
        DualState { ln_lambda: None, xs: vec![0.5 * (X_MIN + X_MAX); m] }
    }
}

struct SeparableProblem {
    ln_a: Vec<f64>,
    a: Vec<f64>,
    /// index into `tables` per coordinate (tables dedup by pilot size)
    table_of: Vec<usize>,
    tables: Vec<Arc<CostTable>>,
}

impl SeparableProblem {
    fn new(op: &'static str, difficulties: &[f64], epsilons: &[u32]) -> Result<Self> {
        let m = difficulties.len();
        if m == 0 {
            return Err(Error::precondition(op, "empty portfolio"));
        }
        if epsilons.len() != m {
            return Err(Error::precondition(
                op,
                format!("length mismatch: difficulties={m}, epsilons={}", epsilons.len()),
            ));
        }
        for &a in difficulties {
            if !(a.is_finite() && a > 0.0) {
                return Err(Error::domain(op, format!("difficulty indices must be positive, got {a}")));
            }
        }
        let mut distinct: Vec<u32> = Vec::new();
        let mut table_of = Vec::with_capacity(m);
        for &eps in epsilons {
            let idx = match distinct.iter().position(|&e| e == eps) {
                Some(i) => i,
                None => {
                    distinct.push(eps);
                    distinct.len() - 1
                }
            };
            table_of.push(idx);
        }
        let mut tables = Vec::with_capacity(distinct.len());
        for &eps in &distinct {
            tables.push(cost_table(eps)?);
        }
        Ok(SeparableProblem {
            ln_a: difficulties.iter().map(|a| a.ln()).collect(),
            a: difficulties.to_vec(),
            table_of,
            tables,
        })
    }

    fn m(&self) -> usize {
        self.a.len()
    }

    fn table(&self, i: usize) -> &CostTable {
        &self.tables[self.table_of[i]]
    }

    /// All coordinate roots at multiplier ln λ, warm-started in place.
    fn coordinates(&self, ln_lambda: f64, xs: &mut [f64], err: &RefCell<Option<Error>>) {
        for (i, x) in xs.iter_mut().enumerate() {
            *x = self.table(i).solve(ln_lambda - self.ln_a[i], *x, err);
        }
    }

    /// Interpolated coupling sum: Σ x_i(λ) from the tables alone.
    fn interp_sum(&self, ln_lambda: f64) -> f64 {
        (0..self.m()).map(|i| self.table(i).invert_approx(ln_lambda - self.ln_a[i])).sum()
    }

    /// Dual bracket on ln λ: below `lo` all coordinates clamp at X_MIN,
    /// above `hi` all clamp at X_MAX.
    fn multiplier_bracket(&self) -> (f64, f64) {
        let lo = (0..self.m())
            .map(|i| self.table(i).at_min() + self.ln_a[i])
            .fold(f64::INFINITY, f64::min);
        let hi = (0..self.m())
            .map(|i| self.table(i).at_max() + self.ln_a[i])
            .fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    fn kappa_at(&self, i: usize, x: f64) -> Result<f64> {
        scaling_ratio_nu(self.table(i).nu, x.exp().clamp(C_MIN, C_MAX))
    }

    /// Solve for the multiplier making `measure(xs)` hit `target`, where
    /// `measure` is any strictly increasing functional of the coordinate
    /// roots (the coupling sum for the tolerance program, the weighted
    /// inflation cost for the confidence program). `at_min`/`at_max` are
    /// the measure values at the all-clamped corners. `seed` (from warm
    /// state or an interpolated pre-solve) shrinks the bracket to a
    /// neighborhood of the root before the exact iteration.
    #[allow(clippy::too_many_arguments)]
    fn solve_dual(
        &self,
        target: f64,
        at_min: f64,
        at_max: f64,
        ftol: f64,
        seed: Option<f64>,
        state: &mut DualState,
        measure: impl Fn(&[f64], &RefCell<Option<Error>>) -> f64,
    ) -> Result<()> {
        let err = RefCell::new(None);
        let (mut lo, mut hi) = self.multiplier_bracket();
        let mut flo = at_min;
        let mut fhi = at_max;
        {
            let mut eval = |ln_lambda: f64| {
                self.coordinates(ln_lambda, &mut state.xs, &err);
                measure(&state.xs, &err)
            };
            if let Some(s) = seed {
                if s > lo && s < hi {
                    let fs = eval(s);
                    if fs.is_finite() && (fs - target).abs() > ftol {
                        // probe outward from the seed until the root is
                        // straddled, growing the step geometrically
                        let mut step = 1e-4;
                        let (mut a, mut fa) = (s, fs);
                        for _ in 0..14 {
                            let b = if fa < target { (a + step).min(hi) } else { (a - step).max(lo) };
                            if b <= lo || b >= hi {
                                break;
                            }
                            let fb = eval(b);
                            if !fb.is_finite() {
                                break;
                            }
                            if (fa < target) != (fb < target) {
                                if fa < target {
                                    lo = a;
                                    flo = fa;
                                    hi = b;
                                    fhi = fb;
                                } else {
                                    lo = b;
                                    flo = fb;
                                    hi = a;
                                    fhi = fa;
                                }
                                break;
                            }
                            if fb < target {
                                lo = b;
                                flo = fb;
                            } else {
                                hi = b;
                                fhi = fb;
                            }
                            a = b;
                            fa = fb;
                            step *= 4.0;
                        }
                    } else if fs.is_finite() {
                        // seed already satisfies the tolerance
                        state.ln_lambda = Some(s);
                        if let Some(e) = err.into_inner() {
                            return Err(e);
                        }
                        return Ok(());
                    }
                }
            }
            let ln_lambda =
                util::solve_monotone(&mut eval, lo, hi, flo, fhi, target, 1e-14, ftol, 200)?;
            // sync the coordinate roots to the returned multiplier
            self.coordinates(ln_lambda, &mut state.xs, &err);
            state.ln_lambda = Some(ln_lambda);
        }
        if let Some(e) = err.into_inner() {
            return Err(e);
        }
        Ok(())
    }
}

/// Minimum-tolerance program: minimize Σ κ(ε_i, c_i) a_i subject to
/// Π c_i >= γ. Returns the confidence levels, correction factors, and
/// the certified tolerance δ = bound(c*) - β*, where β* is the
/// power-optimal error for the supplied difficulties.
pub fn solve_tolerance(
    difficulties: &[f64],
    epsilons: &[u32],
    gamma: f64,
    budget: f64,
    alpha: f64,
) -> Result<CorrectionPlan> {
    const OP: &str = "solve_tolerance";
    let problem = SeparableProblem::new(OP, difficulties, epsilons)?;
    let mut state = DualState::cold(problem.m());
    let xs = dual_solve_coupling_sum(&problem, gamma, &mut state)?;
    finish_tolerance_plan(&xs, difficulties, epsilons, budget, alpha)
}

fn finish_tolerance_plan(
    xs: &[f64],
    difficulties: &[f64],
    epsilons: &[u32],
    budget: f64,
    alpha: f64,
) -> Result<CorrectionPlan> {
    let c: Vec<f64> = xs.iter().map(|x| x.exp().clamp(C_MIN, C_MAX)).collect();
    let bound = worst_case_beta_bound(&c, difficulties, epsilons, budget, alpha)?;
    let beta_star = power::optimal_max_type2_from(difficulties, budget, alpha)?;
    CorrectionPlan::build(c, epsilons, ObjectiveKind::Tolerance, bound - beta_star)
}

/// Solve Σ x_i(λ) = log γ over the dual multiplier.
fn dual_solve_coupling_sum(
    problem: &SeparableProblem,
    gamma: f64,
    state: &mut DualState,
) -> Result<Vec<f64>> {
    const OP: &str = "solve_tolerance";
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::domain(OP, format!("gamma must lie in (0,1), got {gamma}")));
    }
    let log_gamma = gamma.ln();
    let m = problem.m() as f64;
    if log_gamma <= m * X_MIN {
        return Ok(vec![X_MIN; problem.m()]);
    }
    if log_gamma >= m * X_MAX {
        return Ok(vec![X_MAX; problem.m()]);
    }
    // seed the exact phase from a pre-solve on the interpolated tables;
    // table lookups are cheap and the seed lands within a grid cell of
    // the true multiplier regardless of where the last solve was
    let seed = {
        let (lo, hi) = problem.multiplier_bracket();
        util::solve_monotone(
            |l| problem.interp_sum(l),
            lo,
            hi,
            m * X_MIN,
            m * X_MAX,
            log_gamma,
            1e-8,
            1e-6,
            100,
        )
        .ok()
    };
    problem.solve_dual(log_gamma, m * X_MIN, m * X_MAX, 1e-10, seed, state, |xs, _| {
        xs.iter().sum::<f64>()
    })?;
    let total: f64 = state.xs.iter().sum();
    if (total - log_gamma).abs() > 1e-8 {
        return Err(Error::numeric(
            OP,
            format!("dual iteration left coupling residual {:.3e}", total - log_gamma),
        ));
    }
    Ok(state.xs.clone())
}

/// Maximum-confidence program: maximize Π c_i subject to
/// Σ κ(ε_i, c_i) a_i <= d(δ). `beta_star` is the reference optimum used
/// inside the critical threshold; callers without true sigmas supply a
/// plug-in proxy. The budget constraint binds at the optimum (to 1e-8
/// relative) except at the confidence clamps.
pub fn solve_confidence(
    difficulties: &[f64],
    epsilons: &[u32],
    delta: f64,
    budget: f64,
    alpha: f64,
    beta_star: f64,
) -> Result<CorrectionPlan> {
    const OP: &str = "solve_confidence";
    let ceiling = 1.0 - alpha - beta_star;
    if !(delta > 0.0 && delta < ceiling) {
        return Err(Error::domain(
            OP,
            format!("delta must lie in (0, 1-alpha-beta*) = (0, {ceiling:.6}), got {delta}"),
        ));
    }
    let problem = SeparableProblem::new(OP, difficulties, epsilons)?;
    let d_budget = crate::pair::critical_threshold(delta, beta_star, budget, alpha)?;

    let weighted_cost = |xs: &[f64]| -> Result<f64> {
        let mut total = 0.0;
        for (i, &x) in xs.iter().enumerate() {
            total += problem.kappa_at(i, x)? * problem.a[i];
        }
        Ok(total)
    };
    let cost_min = weighted_cost(&vec![X_MIN; problem.m()])?;
    let cost_max = weighted_cost(&vec![X_MAX; problem.m()])?;
    let xs = if d_budget <= cost_min {
        // no inflation slack: every confidence level collapses to the clamp
        vec![X_MIN; problem.m()]
    } else if d_budget >= cost_max {
        vec![X_MAX; problem.m()]
    } else {
        let mut state = DualState::cold(problem.m());
        problem.solve_dual(
            d_budget,
            cost_min,
            cost_max,
            1e-9 * d_budget,
            None,
            &mut state,
            |xs, err| match weighted_cost(xs) {
                Ok(v) => v,
                Err(e) => {
                    *err.borrow_mut() = Some(e);
                    f64::NAN
                }
            },
        )?;
        let achieved = weighted_cost(&state.xs)?;
        if ((achieved - d_budget) / d_budget).abs() > 1e-8 {
            return Err(Error::numeric(
                OP,
                format!("budget constraint residual {:.3e} relative", (achieved - d_budget) / d_budget),
            ));
        }
        state.xs
    };
    let c: Vec<f64> = xs.iter().map(|x| x.exp().clamp(C_MIN, C_MAX)).collect();
    let gamma = c.iter().map(|x| x.ln()).sum::<f64>().exp();
    CorrectionPlan::build(c, epsilons, ObjectiveKind::Confidence, gamma)
}

/// Minimum expected-error program: a one-dimensional search over the
/// certified coverage γ with the minimum-tolerance program as the inner
/// solve. The objective 1 + (bound(c) - 1) Π c_i is scanned on 21
/// coarse points of γ ∈ [1e-6, 1-1e-6] to pick a basin (unimodality is
/// not established, so the scan guards the refinement), then golden
/// section refines to 1e-6.
pub fn solve_expectation(
    difficulties: &[f64],
    epsilons: &[u32],
    budget: f64,
    alpha: f64,
) -> Result<CorrectionPlan> {
    const OP: &str = "solve_expectation";
    let problem = SeparableProblem::new(OP, difficulties, epsilons)?;
    // one problem and one warm dual state shared by every inner solve
    let state = RefCell::new(DualState::cold(problem.m()));
    let objective = |gamma: f64| -> Result<f64> {
        let xs = dual_solve_coupling_sum(&problem, gamma, &mut state.borrow_mut())?;
        let c: Vec<f64> = xs.iter().map(|x| x.exp().clamp(C_MIN, C_MAX)).collect();
        let bound = worst_case_beta_bound(&c, difficulties, epsilons, budget, alpha)?;
        let certified: f64 = c.iter().map(|x| x.ln()).sum::<f64>().exp();
        Ok(1.0 + (bound - 1.0) * certified)
    };
    let err = RefCell::new(None);
    let scan_objective = |gamma: f64| match objective(gamma) {
        Ok(v) => v,
        Err(e) => {
            *err.borrow_mut() = Some(e);
            f64::INFINITY
        }
    };
    let (gamma_hat, _) = util::scan_then_golden(scan_objective, 1e-6, 1.0 - 1e-6, 21, 1e-6);
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    let plan = solve_tolerance(difficulties, epsilons, gamma_hat, budget, alpha)?;
    let bound = worst_case_beta_bound(&plan.c, difficulties, epsilons, budget, alpha)?;
    let value = 1.0 + (bound - 1.0) * plan.certified_gamma;
    CorrectionPlan::build(plan.c, epsilons, ObjectiveKind::Expectation, value)
}

/// End-to-end data-dependent pipeline: build difficulty indices from
/// the pilot estimates, solve the chosen empirical surrogate program,
/// map confidence levels to correction factors through the upper
/// scaling factor, and allocate the budget with the corrected plug-in
/// formula.
///
/// The confidence objective needs the unknown optimum error inside its
/// critical threshold; this implementation substitutes the plug-in
/// optimum computed from the pilot estimates, which is the only
/// quantity available at decision time. Callers surfacing results
/// should echo that substitution (see [`CorrectionPlan`] metadata use
/// in the report layer).
pub fn surrogate_pipeline(
    pilot_sd: &[f64],
    epsilons: &[u32],
    deltas: &[f64],
    budget: f64,
    alpha: f64,
    objective: SurrogateObjective,
) -> Result<(CorrectionPlan, AllocationResult)> {
    const OP: &str = "surrogate_pipeline";
    let m = pilot_sd.len();
    if epsilons.len() != m || deltas.len() != m {
        return Err(Error::precondition(
            OP,
            format!("length mismatch: s={m}, epsilons={}, deltas={}", epsilons.len(), deltas.len()),
        ));
    }
    if m == 0 {
        return Err(Error::precondition(OP, "pilot estimates missing: empty portfolio"));
    }
    for (i, &s) in pilot_sd.iter().enumerate() {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::precondition(OP, format!("pilot sd [{i}] must be positive, got {s}")));
        }
    }
    let difficulties: Vec<f64> =
        pilot_sd.iter().zip(deltas).map(|(&s, &d)| (s / d).powi(2)).collect();
    let plan = match objective {
        SurrogateObjective::Tolerance { gamma } => {
            solve_tolerance(&difficulties, epsilons, gamma, budget, alpha)?
        }
        SurrogateObjective::Confidence { delta } => {
            let beta_proxy = power::optimal_max_type2_from(&difficulties, budget, alpha)?;
            solve_confidence(&difficulties, epsilons, delta, budget, alpha, beta_proxy)?
        }
        SurrogateObjective::Expectation => {
            solve_expectation(&difficulties, epsilons, budget, alpha)?
        }
    };
    let allocation = power::allocation_with_corrections(&plan.k, pilot_sd, deltas, budget, alpha)?;
    Ok((plan, allocation))
}

/// Residual of the shared KKT stationarity condition
/// g'(x_i) a_i = λ across interior coordinates, as the max relative
/// spread of the per-coordinate marginals. Exposed for verification.
pub fn stationarity_spread(plan: &CorrectionPlan, difficulties: &[f64], epsilons: &[u32]) -> Result<f64> {
    const OP: &str = "stationarity_spread";
    let mut marginals = Vec::new();
    for i in 0..plan.c.len() {
        let x = plan.c[i].ln();
        if x <= X_MIN + 1e-9 || x >= X_MAX - 1e-9 {
            continue; // clamped coordinate: KKT holds with multiplier slack
        }
        let nu = check_epsilon(OP, epsilons[i])?;
        marginals.push(ln_marginal_cost(nu, x)? + difficulties[i].ln());
    }
    if marginals.len() < 2 {
        return Ok(0.0);
    }
    let max = marginals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = marginals.iter().cloned().fold(f64::INFINITY, f64::min);
    // marginals are logs, so the spread is already relative
    Ok((max - min).abs())
}
