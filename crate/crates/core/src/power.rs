//! Known-variance core: Type-2 error evaluation, the power-optimal and
//! MSE-optimal allocations, corrected plug-in allocations, and the
//! realized worst-case error under a candidate correction vector.
//!
//! Sample sizes are continuous throughout; [`round_allocation`] offers a
//! largest-remainder integer rounding for reporting only.

use crate::error::{Error, Result};
use crate::special;

/// Pilot-study variance estimate: sample standard deviation `s` from
/// `epsilon >= 2` observations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PilotEstimate {
    pub s: f64,
    pub epsilon: u32,
}

/// One experiment in the portfolio. At least one of `sigma` (true
/// outcome standard deviation) and `pilot` must be present. `theta` is
/// the decision threshold of the underlying hypothesis; it never enters
/// any computed formula and is carried for reporting only.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub sigma: Option<f64>,
    pub pilot: Option<PilotEstimate>,
    pub delta_gap: f64,
    pub theta: Option<f64>,
}

impl ExperimentSpec {
    pub fn validate(&self, index: usize) -> Result<()> {
        const OP: &str = "ExperimentSpec::validate";
        if self.sigma.is_none() && self.pilot.is_none() {
            return Err(Error::precondition(
                OP,
                format!("experiment {index}: needs sigma or a pilot estimate"),
            ));
        }
        if let Some(s) = self.sigma {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::precondition(
                    OP,
                    format!("experiment {index}: sigma must be positive, got {s}"),
                ));
            }
        }
        if let Some(p) = self.pilot {
            if !(p.s.is_finite() && p.s > 0.0) {
                return Err(Error::precondition(
                    OP,
                    format!("experiment {index}: pilot sd must be positive, got {}", p.s),
                ));
            }
            if p.epsilon < 2 {
                return Err(Error::precondition(
                    OP,
                    format!("experiment {index}: pilot size must be >= 2, got {}", p.epsilon),
                ));
            }
        }
        if !(self.delta_gap.is_finite() && self.delta_gap > 0.0) {
            return Err(Error::precondition(
                OP,
                format!(
                    "experiment {index}: minimum detectable gap must be positive, got {}",
                    self.delta_gap
                ),
            ));
        }
        Ok(())
    }
}

/// Ordered collection of experiments sharing a subject budget and a
/// significance level.
#[derive(Debug, Clone)]
pub struct Portfolio {
    pub experiments: Vec<ExperimentSpec>,
    pub budget: f64,
    pub alpha: f64,
}

impl Portfolio {
    pub fn new(experiments: Vec<ExperimentSpec>, budget: f64, alpha: f64) -> Result<Self> {
        const OP: &str = "Portfolio::new";
        if experiments.is_empty() {
            return Err(Error::precondition(OP, "portfolio needs at least one experiment"));
        }
        if !(budget.is_finite() && budget > 0.0) {
            return Err(Error::precondition(OP, format!("budget must be positive, got {budget}")));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::precondition(OP, format!("alpha must lie in (0,1), got {alpha}")));
        }
        for (i, e) in experiments.iter().enumerate() {
            e.validate(i)?;
        }
        Ok(Portfolio { experiments, budget, alpha })
    }

    pub fn len(&self) -> usize {
        self.experiments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.experiments.is_empty()
    }

    pub fn deltas(&self) -> Vec<f64> {
        self.experiments.iter().map(|e| e.delta_gap).collect()
    }

    /// True standard deviations; errors if any experiment lacks one.
    pub fn known_sigmas(&self) -> Result<Vec<f64>> {
        self.experiments
            .iter()
            .enumerate()
            .map(|(i, e)| {
                e.sigma.ok_or_else(|| {
                    Error::precondition(
                        "Portfolio::known_sigmas",
                        format!("experiment {i}: sigma is not known"),
                    )
                })
            })
            .collect()
    }

    /// Difficulty indices (sigma_i / delta_i)^2 from known sigmas.
    pub fn difficulties(&self) -> Result<Vec<f64>> {
        let sigmas = self.known_sigmas()?;
        Ok(sigmas
            .iter()
            .zip(self.experiments.iter())
            .map(|(s, e)| (s / e.delta_gap).powi(2))
            .collect())
    }
}

/// Difficulty index (sigma/delta)^2 of a single experiment.
pub fn difficulty_index(sigma: f64, delta_gap: f64) -> f64 {
    (sigma / delta_gap).powi(2)
}

/// Per-experiment sample sizes with the resulting Type-2 errors.
#[derive(Debug, Clone)]
pub struct AllocationResult {
    pub n: Vec<f64>,
    pub per_experiment_beta: Vec<f64>,
    pub max_beta: f64,
}

impl AllocationResult {
    fn from_sizes(n: Vec<f64>, sigmas: &[f64], deltas: &[f64], alpha: f64) -> Result<Self> {
        let mut betas = Vec::with_capacity(n.len());
        for i in 0..n.len() {
            betas.push(type2_error(sigmas[i], n[i], deltas[i], alpha)?);
        }
        let max_beta = betas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Ok(AllocationResult { n, per_experiment_beta: betas, max_beta })
    }
}

/// Type-2 error of the one-sided z-test at design gap `delta_gap`:
/// Φ(q_{1-α} - Δ √n / σ). Strictly decreasing in `n`; equals `1 - α`
/// exactly at `n = 0`.
pub fn type2_error(sigma: f64, n: f64, delta_gap: f64, alpha: f64) -> Result<f64> {
    const OP: &str = "type2_error";
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::domain(OP, format!("sigma must be positive, got {sigma}")));
    }
    if !(delta_gap.is_finite() && delta_gap > 0.0) {
        return Err(Error::domain(OP, format!("delta_gap must be positive, got {delta_gap}")));
    }
    if !(n.is_finite() && n >= 0.0) {
        return Err(Error::domain(OP, format!("n must be finite and >= 0, got {n}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(OP, format!("alpha must lie in (0,1), got {alpha}")));
    }
    if n == 0.0 {
        return Ok(1.0 - alpha);
    }
    let q = special::std_normal_quantile(1.0 - alpha)?;
    special::std_normal_cdf(q - delta_gap * n.sqrt() / sigma)
}

/// Worst-case Type-2 error at the power-optimal allocation, computed
/// from difficulty indices: Φ(q_{1-α} - sqrt(N / Σ a_j)).
pub fn optimal_max_type2_from(difficulties: &[f64], budget: f64, alpha: f64) -> Result<f64> {
    const OP: &str = "optimal_max_type2";
    if difficulties.is_empty() {
        return Err(Error::precondition(OP, "empty difficulty list"));
    }
    for &a in difficulties {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::domain(OP, format!("difficulty indices must be positive, got {a}")));
        }
    }
    if !(budget.is_finite() && budget > 0.0) {
        return Err(Error::domain(OP, format!("budget must be positive, got {budget}")));
    }
    let total: f64 = difficulties.iter().sum();
    let q = special::std_normal_quantile(1.0 - alpha)?;
    special::std_normal_cdf(q - (budget / total).sqrt())
}

/// Power-optimal allocation: n_i = N a_i / Σ a_j with a_i = (σ_i/Δ_i)².
/// Equalizes the Type-2 error across experiments and exhausts the budget.
pub fn power_optimal_allocation(portfolio: &Portfolio) -> Result<AllocationResult> {
    let sigmas = portfolio.known_sigmas()?;
    let deltas = portfolio.deltas();
    let difficulties = portfolio.difficulties()?;
    let total: f64 = difficulties.iter().sum();
    let n: Vec<f64> = difficulties.iter().map(|a| portfolio.budget * a / total).collect();
    AllocationResult::from_sizes(n, &sigmas, &deltas, portfolio.alpha)
}

/// The common (and optimal) worst-case Type-2 error of
/// [`power_optimal_allocation`].
pub fn optimal_max_type2(portfolio: &Portfolio) -> Result<f64> {
    optimal_max_type2_from(&portfolio.difficulties()?, portfolio.budget, portfolio.alpha)
}

/// MSE-optimal allocation: n_i = N σ_i² / Σ σ_j². Ignores the detectable
/// gaps entirely; its Type-2 errors are evaluated for comparison.
pub fn mse_optimal_allocation(portfolio: &Portfolio) -> Result<AllocationResult> {
    let sigmas = portfolio.known_sigmas()?;
    let deltas = portfolio.deltas();
    let total: f64 = sigmas.iter().map(|s| s * s).sum();
    let n: Vec<f64> = sigmas.iter().map(|s| portfolio.budget * s * s / total).collect();
    AllocationResult::from_sizes(n, &sigmas, &deltas, portfolio.alpha)
}

/// Plug-in allocation with correction factors:
/// n_i = N k_i (S_i/Δ_i)² / Σ_j k_j (S_j/Δ_j)².
///
/// Only the ratios of `k` matter; scaling all entries by a positive
/// constant leaves the allocation unchanged. The reported Type-2 errors
/// are design-basis values at the adjusted plug-in deviations √k_i S_i,
/// not errors realized under the true sigmas (see
/// [`realized_max_type2`]).
pub fn allocation_with_corrections(
    k: &[f64],
    pilot_sd: &[f64],
    deltas: &[f64],
    budget: f64,
    alpha: f64,
) -> Result<AllocationResult> {
    const OP: &str = "allocation_with_corrections";
    let m = deltas.len();
    if k.len() != m || pilot_sd.len() != m {
        return Err(Error::precondition(
            OP,
            format!("length mismatch: k={}, s={}, deltas={}", k.len(), pilot_sd.len(), m),
        ));
    }
    if m == 0 {
        return Err(Error::precondition(OP, "empty portfolio"));
    }
    for (i, &ki) in k.iter().enumerate() {
        if !(ki.is_finite() && ki >= 1.0) {
            return Err(Error::precondition(OP, format!("k[{i}] must be >= 1, got {ki}")));
        }
    }
    for (i, &s) in pilot_sd.iter().enumerate() {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::precondition(OP, format!("s[{i}] must be positive, got {s}")));
        }
    }
    let weights: Vec<f64> = (0..m).map(|i| k[i] * (pilot_sd[i] / deltas[i]).powi(2)).collect();
    let total: f64 = weights.iter().sum();
    let n: Vec<f64> = weights.iter().map(|w| budget * w / total).collect();
    let adjusted_sd: Vec<f64> = (0..m).map(|i| k[i].sqrt() * pilot_sd[i]).collect();
    AllocationResult::from_sizes(n, &adjusted_sd, deltas, alpha)
}

/// Realized maximum Type-2 error of the corrected plug-in allocation
/// when the true standard deviations are `true_sigmas`. Always at least
/// the power-optimal error for those sigmas.
pub fn realized_max_type2(
    k: &[f64],
    pilot_sd: &[f64],
    true_sigmas: &[f64],
    deltas: &[f64],
    budget: f64,
    alpha: f64,
) -> Result<f64> {
    const OP: &str = "realized_max_type2";
    if true_sigmas.len() != deltas.len() {
        return Err(Error::precondition(
            OP,
            format!("length mismatch: sigmas={}, deltas={}", true_sigmas.len(), deltas.len()),
        ));
    }
    let alloc = allocation_with_corrections(k, pilot_sd, deltas, budget, alpha)?;
    let mut worst: f64 = 0.0;
    for i in 0..deltas.len() {
        let beta = type2_error(true_sigmas[i], alloc.n[i], deltas[i], alpha)?;
        worst = worst.max(beta);
    }
    Ok(worst)
}

/// Largest-remainder rounding of a continuous allocation to integers
/// summing to `round(Σ n_i)`. Reporting convenience only; all analysis
/// is done on the continuous solution.
pub fn round_allocation(n: &[f64]) -> Vec<u64> {
    let total: f64 = n.iter().sum();
    let target = total.round() as u64;
    let mut floors: Vec<u64> = n.iter().map(|x| x.floor() as u64).collect();
    let assigned: u64 = floors.iter().sum();
    let mut remainders: Vec<(usize, f64)> =
        n.iter().enumerate().map(|(i, x)| (i, x - x.floor())).collect();
    remainders.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite remainders"));
    let mut leftover = target.saturating_sub(assigned);
    for (i, _) in remainders {
        if leftover == 0 {
            break;
        }
        floors[i] += 1;
        leftover -= 1;
    }
    floors
}
