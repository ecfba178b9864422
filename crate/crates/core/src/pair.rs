//! Exact two-experiment analysis with a shared pilot size: the coverage
//! probability of the worst-case error threshold, its maximizing
//! inflation ratio, closed-form optima for the tolerance and confidence
//! criteria, and a quadrature-based optimum for the expected worst-case
//! error.
//!
//! With two experiments the correction vector collapses to the single
//! ratio `r = k_1 / k_2`, and the relevant randomness is the ratio of
//! two independent chi-squared pilot variates, which follows an F
//! distribution with symmetric degrees of freedom.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution};

use crate::error::{Error, Result};
use crate::special;
use crate::util;

/// Two experiments with difficulty indices `a1, a2 = (σ_i/Δ_i)²`, a
/// shared pilot size `epsilon >= 2`, budget and significance level.
#[derive(Debug, Clone, Copy)]
pub struct PairInstance {
    pub a1: f64,
    pub a2: f64,
    pub epsilon: u32,
    pub budget: f64,
    pub alpha: f64,
}

impl PairInstance {
    pub fn new(a1: f64, a2: f64, epsilon: u32, budget: f64, alpha: f64) -> Result<Self> {
        const OP: &str = "PairInstance::new";
        if !(a1.is_finite() && a1 > 0.0 && a2.is_finite() && a2 > 0.0) {
            return Err(Error::precondition(
                OP,
                format!("difficulty indices must be positive, got ({a1}, {a2})"),
            ));
        }
        if epsilon < 2 {
            return Err(Error::precondition(OP, format!("pilot size must be >= 2, got {epsilon}")));
        }
        if !(budget.is_finite() && budget > 0.0) {
            return Err(Error::precondition(OP, format!("budget must be positive, got {budget}")));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::precondition(OP, format!("alpha must lie in (0,1), got {alpha}")));
        }
        Ok(PairInstance { a1, a2, epsilon, budget, alpha })
    }

    /// Degrees of freedom of the pilot variance law, ε - 1.
    pub fn nu(&self) -> f64 {
        f64::from(self.epsilon - 1)
    }

    /// Best achievable worst-case Type-2 error with known sigmas:
    /// Φ(q_{1-α} - sqrt(N/(a1+a2))).
    pub fn optimal_beta(&self) -> Result<f64> {
        crate::power::optimal_max_type2_from(&[self.a1, self.a2], self.budget, self.alpha)
    }
}

/// Result of a two-experiment criterion: the optimal inflation ratio,
/// the critical threshold where applicable (tolerance and confidence
/// criteria; absent for the expectation criterion), and the optimized
/// objective value (δ*, γ*, or the expected worst-case error).
#[derive(Debug, Clone, Copy)]
pub struct PairOptimum {
    pub r_star: f64,
    pub d_star: Option<f64>,
    pub objective: f64,
}

/// Critical threshold d(δ) = N / (q_{1-α} - Φ⁻¹(β* + δ))², the largest
/// total inflated difficulty compatible with a worst-case error of
/// β* + δ. Strictly increasing on δ ∈ (0, 1-α-β*), with d(0) equal to
/// the total difficulty at the two-experiment optimum.
pub fn critical_threshold(delta: f64, beta_star: f64, budget: f64, alpha: f64) -> Result<f64> {
    const OP: &str = "critical_threshold";
    let ceiling = 1.0 - alpha - beta_star;
    if !(delta >= 0.0 && delta < ceiling) {
        return Err(Error::domain(
            OP,
            format!("delta must lie in [0, 1-alpha-beta*) = [0, {ceiling:.6}), got {delta}"),
        ));
    }
    let q = special::std_normal_quantile(1.0 - alpha)?;
    let inner = special::std_normal_quantile(beta_star + delta)?;
    let denom = q - inner;
    if denom <= 0.0 {
        return Err(Error::numeric(OP, format!("degenerate threshold: q - Φ⁻¹(β*+δ) = {denom}")));
    }
    Ok(budget / (denom * denom))
}

/// Coverage probability that both realized inflated difficulties stay
/// below `d`:
/// `F((d-a2)/(r a1)) - F(a2/(r (d-a1)))` with F the CDF of the
/// symmetric-F pilot ratio law. Zero (by continuous extension) whenever
/// `d <= a1 + a2`.
pub fn coverage_probability(r: f64, d: f64, inst: &PairInstance) -> Result<f64> {
    const OP: &str = "coverage_probability";
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::domain(OP, format!("inflation ratio must be positive, got {r}")));
    }
    if d <= inst.a1 + inst.a2 {
        return Ok(0.0);
    }
    let nu = inst.nu();
    let upper = (d - inst.a2) / (r * inst.a1);
    let lower = inst.a2 / (r * (d - inst.a1));
    let p = special::f_cdf(upper, nu)? - special::f_cdf(lower, nu)?;
    Ok(p.clamp(0.0, 1.0))
}

/// The unique inflation ratio maximizing [`coverage_probability`] at a
/// fixed threshold `d > a1 + a2`:
/// `r(d) = sqrt( (a2/(d-a1)) * ((d-a2)/a1) )`.
pub fn coverage_maximizer(d: f64, a1: f64, a2: f64) -> Result<f64> {
    const OP: &str = "coverage_maximizer";
    if !(a1 > 0.0 && a2 > 0.0) {
        return Err(Error::domain(OP, format!("difficulties must be positive, got ({a1}, {a2})")));
    }
    if d <= a1 + a2 {
        return Err(Error::domain(
            OP,
            format!("threshold must exceed a1 + a2 = {}, got {d}", a1 + a2),
        ));
    }
    Ok((a2 / (d - a1) * ((d - a2) / a1)).sqrt())
}

/// Minimize the tolerance at target coverage `gamma`: closed-form
/// threshold
/// `d* = (a1 + a2 + sqrt((a1-a2)² + 4 a1 a2 F⁻¹((1+γ)/2)²)) / 2`,
/// ratio `r* = sqrt(m1 m2)` built from `d*`, and the implied minimal
/// tolerance recovered by inverting the critical threshold.
pub fn tolerance_optimum(gamma: f64, inst: &PairInstance) -> Result<PairOptimum> {
    const OP: &str = "tolerance_optimum";
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::domain(OP, format!("gamma must lie in (0,1), got {gamma}")));
    }
    let nu = inst.nu();
    let fq = special::f_quantile((1.0 + gamma) / 2.0, nu)?;
    let (a1, a2) = (inst.a1, inst.a2);
    let disc = ((a1 - a2).powi(2) + 4.0 * a1 * a2 * fq * fq).sqrt();
    let d_star = 0.5 * (a1 + a2 + disc);
    let r_star = coverage_maximizer(d_star, a1, a2)?;
    // invert d(δ): δ* = Φ(q_{1-α} - sqrt(N/d*)) - β*
    let q = special::std_normal_quantile(1.0 - inst.alpha)?;
    let beta_at_d = special::std_normal_cdf(q - (inst.budget / d_star).sqrt())?;
    let delta_star = beta_at_d - inst.optimal_beta()?;
    Ok(PairOptimum { r_star, d_star: Some(d_star), objective: delta_star })
}

/// Maximize coverage at a fixed tolerance `delta`: the threshold is
/// d(δ) and the optimal ratio is its coverage maximizer. The objective
/// is the achieved coverage.
pub fn confidence_optimum(delta: f64, inst: &PairInstance, beta_star: f64) -> Result<PairOptimum> {
    const OP: &str = "confidence_optimum";
    let ceiling = 1.0 - inst.alpha - beta_star;
    if !(delta > 0.0 && delta < ceiling) {
        return Err(Error::domain(
            OP,
            format!("delta must lie in (0, {ceiling:.6}), got {delta}"),
        ));
    }
    let d = critical_threshold(delta, beta_star, inst.budget, inst.alpha)?;
    let r_star = coverage_maximizer(d, inst.a1, inst.a2)?;
    let gamma = coverage_probability(r_star, d, inst)?;
    Ok(PairOptimum { r_star, d_star: Some(d), objective: gamma })
}

// ---------------------------------------------------------------------------
// Expectation criterion
// ---------------------------------------------------------------------------

/// Worst realized total difficulty at log-ratio displacement `y`:
/// max(a1 + a2 e^{-y}, a2 + a1 e^{y}).
fn worst_difficulty(y: f64, a1: f64, a2: f64) -> f64 {
    (a1 + a2 * (-y).exp()).max(a2 + a1 * y.exp())
}

/// Quadrature over the log pilot-ratio density
/// f(w) ∝ e^{(ν/2)w} (1+e^w)^{-ν}, normalized numerically. Composite
/// Gauss-Legendre panels on a symmetric interval wide enough that the
/// truncated tail mass is far below the 1e-10 normalization check.
pub(crate) struct LogRatioQuadrature {
    nodes: Vec<f64>,
    /// weight * density at each node, already divided by the numeric
    /// normalizer
    mass: Vec<f64>,
}

impl LogRatioQuadrature {
    pub(crate) fn new(nu: f64) -> Result<Self> {
        const OP: &str = "LogRatioQuadrature::new";
        let half_width = (40.0 / nu.sqrt()).max(50.0 / nu);
        let ln_norm = 2.0 * special::ln_gamma(0.5 * nu) - special::ln_gamma(nu);
        let ln_density = |w: f64| {
            // softplus keeps ln(1+e^w) stable for large |w|
            let softplus = w.max(0.0) + (-w.abs()).exp().ln_1p();
            0.5 * nu * w - nu * softplus - ln_norm
        };
        let mut panels = 48usize;
        loop {
            let (gl_nodes, gl_weights) = util::gauss_legendre(20);
            let mut nodes = Vec::with_capacity(panels * 20);
            let mut mass = Vec::with_capacity(panels * 20);
            let panel_width = 2.0 * half_width / panels as f64;
            for p in 0..panels {
                let lo = -half_width + p as f64 * panel_width;
                let mid = lo + 0.5 * panel_width;
                let scale = 0.5 * panel_width;
                for (&x, &w) in gl_nodes.iter().zip(&gl_weights) {
                    let node = mid + scale * x;
                    nodes.push(node);
                    mass.push(w * scale * ln_density(node).exp());
                }
            }
            let total: f64 = mass.iter().sum();
            if (total - 1.0).abs() <= 1e-10 {
                for m in &mut mass {
                    *m /= total;
                }
                return Ok(LogRatioQuadrature { nodes, mass });
            }
            panels *= 2;
            if panels > 384 {
                return Err(Error::numeric(
                    OP,
                    format!(
                        "density quadrature failed to normalize: integral {total:.12} on \
                         [-{half_width:.3}, {half_width:.3}] at nu={nu}"
                    ),
                ));
            }
        }
    }

    /// E[ g(W + s) ] over the log pilot-ratio law.
    pub(crate) fn expect(&self, s: f64, g: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.mass).map(|(&w, &m)| m * g(w + s)).sum()
    }
}

/// Minimize the expected worst-case Type-2 error over the inflation
/// ratio. The objective J(s) = E[Φ(q_{1-α} - sqrt(N / max-difficulty))]
/// is evaluated by quadrature over the log pilot-ratio density; a
/// 41-point coarse scan over s = log r ∈ [-10, 10] brackets the optimum
/// before golden-section refinement to 1e-6.
pub fn expectation_optimum(inst: &PairInstance) -> Result<PairOptimum> {
    let quad = LogRatioQuadrature::new(inst.nu())?;
    let q = special::std_normal_quantile(1.0 - inst.alpha)?;
    let (a1, a2, n) = (inst.a1, inst.a2, inst.budget);
    let objective = |s: f64| {
        quad.expect(s, |y| {
            let m = worst_difficulty(y, a1, a2);
            // Φ(z) = erfc(-z/√2)/2
            let z = q - (n / m).sqrt();
            0.5 * special::erfc(-z * std::f64::consts::FRAC_1_SQRT_2)
        })
    };
    let (s_star, value) = util::scan_then_golden(objective, -10.0, 10.0, 41, 1e-6);
    Ok(PairOptimum { r_star: s_star.exp(), d_star: None, objective: value })
}

// ---------------------------------------------------------------------------
// Monte Carlo verification helpers (deterministic per seed)
// ---------------------------------------------------------------------------

/// Draw the pair of realized inflated difficulties (U1, U2) once.
fn draw_difficulty_pair(
    r: f64,
    inst: &PairInstance,
    chi: &ChiSquared<f64>,
    rng: &mut ChaCha8Rng,
) -> (f64, f64) {
    let y1 = chi.sample(rng);
    let y2 = chi.sample(rng);
    let u1 = inst.a1 + inst.a2 * y2 / (r * y1);
    let u2 = inst.a2 + r * inst.a1 * y1 / y2;
    (u1, u2)
}

/// Monte Carlo estimate of the coverage probability
/// P(max(U1, U2) <= d) with `draws` chi-squared pilot pairs.
pub fn simulate_coverage(r: f64, d: f64, inst: &PairInstance, draws: u64, seed: u64) -> f64 {
    let chi = ChiSquared::new(inst.nu()).expect("valid degrees of freedom");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0u64;
    for _ in 0..draws {
        let (u1, u2) = draw_difficulty_pair(r, inst, &chi, &mut rng);
        if u1.max(u2) <= d {
            hits += 1;
        }
    }
    hits as f64 / draws as f64
}

/// Monte Carlo estimate (mean, standard error) of the expected
/// worst-case Type-2 error at inflation ratio `r`.
pub fn simulate_expected_max_error(
    r: f64,
    inst: &PairInstance,
    draws: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    let chi = ChiSquared::new(inst.nu())
        .map_err(|e| Error::numeric("simulate_expected_max_error", e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = special::std_normal_quantile(1.0 - inst.alpha)?;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..draws {
        let (u1, u2) = draw_difficulty_pair(r, inst, &chi, &mut rng);
        let z = q - (inst.budget / u1.max(u2)).sqrt();
        let beta = 0.5 * special::erfc(-z * std::f64::consts::FRAC_1_SQRT_2);
        sum += beta;
        sum_sq += beta * beta;
    }
    let nf = draws as f64;
    let mean = sum / nf;
    let var = (sum_sq / nf - mean * mean).max(0.0);
    Ok((mean, (var / nf).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(a1: f64, a2: f64, eps: u32) -> PairInstance {
        PairInstance::new(a1, a2, eps, 200.0, 0.05).unwrap()
    }

    #[test]
    fn threshold_at_zero_tolerance_is_total_difficulty() {
        let i = inst(1.0, 4.0, 20);
        let beta_star = i.optimal_beta().unwrap();
        let d0 = critical_threshold(0.0, beta_star, i.budget, i.alpha).unwrap();
        assert!((d0 - 5.0).abs() < 1e-8, "d(0) = {d0}");
    }

    #[test]
    fn threshold_diverges_at_ceiling() {
        let i = inst(1.0, 4.0, 20);
        let beta_star = i.optimal_beta().unwrap();
        let ceiling = 1.0 - i.alpha - beta_star;
        let d = critical_threshold(ceiling - 1e-9, beta_star, i.budget, i.alpha).unwrap();
        assert!(d > 1e6, "d near ceiling = {d}");
        assert!(critical_threshold(ceiling + 1e-6, beta_star, i.budget, i.alpha).is_err());
    }

    #[test]
    fn threshold_monotone_in_delta() {
        let i = inst(0.7, 2.0, 30);
        let beta_star = i.optimal_beta().unwrap();
        let ceiling = 1.0 - i.alpha - beta_star;
        let mut prev = 0.0;
        for k in 1..=100 {
            let delta = ceiling * k as f64 / 101.0;
            let d = critical_threshold(delta, beta_star, i.budget, i.alpha).unwrap();
            assert!(d > prev);
            prev = d;
        }
    }

    #[test]
    fn coverage_zero_below_support() {
        let i = inst(1.0, 4.0, 20);
        assert_eq!(coverage_probability(1.0, 5.0, &i).unwrap(), 0.0);
        assert_eq!(coverage_probability(1.0, 2.0, &i).unwrap(), 0.0);
    }

    #[test]
    fn coverage_vanishes_at_extreme_ratios() {
        let i = inst(1.0, 4.0, 20);
        assert!(coverage_probability(1e-9, 12.0, &i).unwrap() < 1e-3);
        assert!(coverage_probability(1e9, 12.0, &i).unwrap() < 1e-3);
    }

    #[test]
    fn coverage_equal_difficulties_collapses_to_symmetric_band() {
        // with a1 = a2 = a and r = 1 the coverage is 2 F(sqrt(m2/m1)) - 1
        let i = inst(2.0, 2.0, 20);
        let d = 7.0;
        let h = coverage_probability(1.0, d, &i).unwrap();
        let m1 = i.a2 / (d - i.a1);
        let m2 = (d - i.a2) / i.a1;
        let expected = 2.0 * special::f_cdf((m2 / m1).sqrt(), i.nu()).unwrap() - 1.0;
        assert!((h - expected).abs() < 1e-12);
    }

    #[test]
    fn maximizer_formula_and_symmetry() {
        assert!(coverage_maximizer(6.0, 2.0, 2.0).unwrap() - 1.0 == 0.0);
        let r = coverage_maximizer(6.0, 1.0, 4.0).unwrap();
        assert!((r - 1.6_f64.sqrt()).abs() < 1e-12);
        assert!(coverage_maximizer(4.9, 1.0, 4.0).is_err());
    }

    #[test]
    fn maximizer_beats_grid() {
        let i = inst(1.0, 4.0, 20);
        let d = 9.0;
        let r_star = coverage_maximizer(d, i.a1, i.a2).unwrap();
        let h_star = coverage_probability(r_star, d, &i).unwrap();
        for &r in util::geomspace(1e-3, 1e3, 601).iter() {
            let h = coverage_probability(r, d, &i).unwrap();
            assert!(h_star >= h - 1e-12, "H({r}) = {h} beats H(r*) = {h_star}");
        }
    }

    #[test]
    fn coverage_nondecreasing_in_threshold() {
        let i = inst(1.3, 2.4, 10);
        for &r in &[0.3, 1.0, 3.0] {
            let mut prev = -1.0;
            for k in 0..200 {
                let d = (i.a1 + i.a2) * (1.0 + 1e-6) + 0.05 * k as f64;
                let h = coverage_probability(r, d, &i).unwrap();
                assert!(h >= prev - 1e-12);
                prev = h;
            }
        }
    }

    #[test]
    fn coverage_unimodal_in_ratio() {
        let i = inst(1.0, 4.0, 20);
        let d = 9.0;
        let grid = util::geomspace(1e-3, 1e3, 301);
        let values: Vec<f64> =
            grid.iter().map(|&r| coverage_probability(r, d, &i).unwrap()).collect();
        let mut sign_changes = 0;
        let mut prev_rising = true;
        for w in values.windows(2) {
            let rising = w[1] >= w[0] - 1e-12;
            if prev_rising && !rising {
                sign_changes += 1;
            }
            prev_rising = rising;
        }
        assert!(sign_changes <= 1, "coverage not unimodal: {sign_changes} descents");
    }

    #[test]
    fn tolerance_optimum_equal_difficulties() {
        let a = 1.7;
        let i = inst(a, a, 20);
        let opt = tolerance_optimum(0.8, &i).unwrap();
        assert!((opt.r_star - 1.0).abs() < 1e-12);
        // d* = a (1 + F⁻¹((1+γ)/2))
        let fq = special::f_quantile(0.9, i.nu()).unwrap();
        assert!((opt.d_star.unwrap() - a * (1.0 + fq)).abs() < 1e-10);
    }

    #[test]
    fn tolerance_optimum_attains_target_coverage() {
        let i = inst(1.0, 4.0, 20);
        for &gamma in &[0.5, 0.7, 0.9, 0.95] {
            let opt = tolerance_optimum(gamma, &i).unwrap();
            let h = coverage_probability(opt.r_star, opt.d_star.unwrap(), &i).unwrap();
            assert!((h - gamma).abs() < 1e-9, "gamma={gamma}: H = {h}");
            assert!(opt.d_star.unwrap() > i.a1 + i.a2);
            assert!(opt.objective > 0.0);
        }
    }

    #[test]
    fn tolerance_optimum_coverage_by_simulation() {
        let i = inst(1.0, 4.0, 20);
        let opt = tolerance_optimum(0.9, &i).unwrap();
        let mc = simulate_coverage(opt.r_star, opt.d_star.unwrap(), &i, 400_000, 31);
        assert!((mc - 0.9).abs() < 0.005, "simulated coverage {mc}");
    }

    #[test]
    fn tolerance_threshold_increases_with_coverage() {
        let i = inst(1.0, 2.5, 15);
        let mut prev = 0.0;
        for &gamma in &[0.1, 0.3, 0.5, 0.7, 0.9, 0.99] {
            let d = tolerance_optimum(gamma, &i).unwrap().d_star.unwrap();
            assert!(d > prev);
            prev = d;
        }
    }

    #[test]
    fn tolerance_consistency_with_confidence() {
        // feeding δ* back into the confidence criterion must recover γ
        let i = inst(1.0, 4.0, 20);
        let beta_star = i.optimal_beta().unwrap();
        for &gamma in &[0.6, 0.8, 0.9] {
            let tol = tolerance_optimum(gamma, &i).unwrap();
            let conf = confidence_optimum(tol.objective, &i, beta_star).unwrap();
            assert!(
                (conf.objective - gamma).abs() < 1e-6,
                "gamma={gamma}: recovered {}",
                conf.objective
            );
        }
    }

    #[test]
    fn confidence_ratio_sign_pattern() {
        let beta = |i: &PairInstance| i.optimal_beta().unwrap();
        let i_eq = inst(2.0, 2.0, 20);
        let r_eq = confidence_optimum(0.1, &i_eq, beta(&i_eq)).unwrap().r_star;
        assert!((r_eq - 1.0).abs() < 1e-12);
        let i_lt = inst(1.0, 4.0, 20);
        assert!(confidence_optimum(0.1, &i_lt, beta(&i_lt)).unwrap().r_star > 1.0);
        let i_gt = inst(4.0, 1.0, 20);
        assert!(confidence_optimum(0.1, &i_gt, beta(&i_gt)).unwrap().r_star < 1.0);
    }

    #[test]
    fn confidence_ratio_monotone_in_tolerance() {
        let i = inst(1.0, 4.0, 20);
        let beta_star = i.optimal_beta().unwrap();
        let mut prev = 0.0;
        for &delta in &[0.02, 0.05, 0.1, 0.2, 0.4, 0.6] {
            let r = confidence_optimum(delta, &i, beta_star).unwrap().r_star;
            assert!(r >= prev, "r* not increasing at delta={delta}");
            prev = r;
        }
    }

    #[test]
    fn expectation_optimum_symmetric_is_unit_ratio() {
        let i = inst(2.0, 2.0, 20);
        let opt = expectation_optimum(&i).unwrap();
        assert!((opt.r_star - 1.0).abs() < 1e-3, "r* = {}", opt.r_star);
    }

    #[test]
    fn expectation_optimum_sign_pattern() {
        let lt = expectation_optimum(&inst(1.0, 4.0, 20)).unwrap();
        assert!(lt.r_star > 1.0);
        let gt = expectation_optimum(&inst(4.0, 1.0, 20)).unwrap();
        assert!(gt.r_star < 1.0);
    }

    #[test]
    fn expectation_ratio_flattens_with_pilot_size() {
        let mut prev_gap = f64::INFINITY;
        for &eps in &[20u32, 50, 100, 500] {
            let opt = expectation_optimum(&inst(1.0, 3.0, eps)).unwrap();
            let gap = (opt.r_star - 1.0).abs();
            assert!(gap < prev_gap, "eps={eps}: |r*-1| = {gap} not below {prev_gap}");
            prev_gap = gap;
        }
    }

    #[test]
    fn quadrature_matches_monte_carlo_coverage() {
        let i = inst(1.3, 2.9, 25);
        let d = 8.0;
        let r = 1.4;
        let exact = coverage_probability(r, d, &i).unwrap();
        let draws = 1_000_000;
        let mc = simulate_coverage(r, d, &i, draws, 977);
        let se = (exact * (1.0 - exact) / draws as f64).sqrt();
        assert!((mc - exact).abs() < 3.0 * se + 1e-12, "mc={mc} exact={exact} se={se}");
    }

    #[test]
    fn seeded_monte_carlo_is_deterministic() {
        let i = inst(1.0, 4.0, 20);
        let a = simulate_coverage(1.2, 9.0, &i, 10_000, 7);
        let b = simulate_coverage(1.2, 9.0, &i, 10_000, 7);
        assert_eq!(a, b);
    }

    #[test]
    fn quadrature_objective_matches_monte_carlo() {
        let i = inst(1.0, 4.0, 20);
        let opt = expectation_optimum(&i).unwrap();
        let (mc_mean, mc_se) =
            simulate_expected_max_error(opt.r_star, &i, 1_000_000, 1234).unwrap();
        assert!(
            (opt.objective - mc_mean).abs() < 3.0 * mc_se,
            "quadrature {} vs mc {} ± {}",
            opt.objective,
            mc_mean,
            mc_se
        );
    }
}
