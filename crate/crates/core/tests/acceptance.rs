//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line with its runtime (run with `--nocapture` to see them). Criteria
//! are serialized behind a lock so the stated runtime limits are
//! measured on an otherwise idle process.

mod common;

use std::panic::AssertUnwindSafe;
use std::sync::Mutex;
use std::time::Instant;

use powerplan::pair::{
    self, coverage_probability, expectation_optimum, tolerance_optimum, PairInstance,
};
use powerplan::power::{
    self, optimal_max_type2_from, power_optimal_allocation, type2_error, ExperimentSpec,
    Portfolio,
};
use powerplan::robust::{
    self, solve_confidence, solve_expectation, solve_tolerance, SurrogateObjective,
};
use powerplan::sim::{self, StudyConfig};
use powerplan::special;
use powerplan::util;

static SERIAL: Mutex<()> = Mutex::new(());

fn run_criterion(number: u32, desc: &str, limit_s: f64, body: impl FnOnce() -> String) {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let outcome = std::panic::catch_unwind(AssertUnwindSafe(body));
    let elapsed = start.elapsed().as_secs_f64();
    match outcome {
        Ok(detail) => {
            let timely = elapsed < limit_s;
            println!(
                "[{}] criterion {number}: {desc}: {detail} ({elapsed:.2}s, limit {limit_s}s)",
                if timely { "PASS" } else { "FAIL" }
            );
            assert!(timely, "criterion {number} exceeded its runtime limit");
        }
        Err(panic) => {
            println!("[FAIL] criterion {number}: {desc} ({elapsed:.2}s)");
            std::panic::resume_unwind(panic);
        }
    }
}

fn known_portfolio(sigmas: &[f64], deltas: &[f64], budget: f64, alpha: f64) -> Portfolio {
    let experiments = sigmas
        .iter()
        .zip(deltas)
        .map(|(&s, &d)| ExperimentSpec { sigma: Some(s), pilot: None, delta_gap: d, theta: None })
        .collect();
    Portfolio::new(experiments, budget, alpha).unwrap()
}

#[test]
fn criterion_1_equalization_across_random_portfolios() {
    run_criterion(1, "per-experiment error equalization and budget exhaustion", 5.0, || {
        let mut rng = common::rng(1001);
        let mut worst_spread = 0.0f64;
        let mut worst_residual = 0.0f64;
        for trial in 0..500 {
            let m = 2 + (trial * 7) % 99;
            let sigmas: Vec<f64> =
                (0..m).map(|_| common::uniform(&mut rng, 0.1, 5.0)).collect();
            let deltas: Vec<f64> =
                (0..m).map(|_| common::uniform(&mut rng, 0.01, 2.0)).collect();
            let budget = common::uniform(&mut rng, 100.0, 10_000.0);
            let alloc =
                power_optimal_allocation(&known_portfolio(&sigmas, &deltas, budget, 0.05))
                    .unwrap();
            let max = alloc.per_experiment_beta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let min = alloc.per_experiment_beta.iter().cloned().fold(f64::INFINITY, f64::min);
            let spread = max - min;
            let residual = (alloc.n.iter().sum::<f64>() - budget).abs();
            assert!(spread < 1e-9, "portfolio {trial} (M={m}): spread {spread}");
            assert!(residual < 1e-9, "portfolio {trial} (M={m}): residual {residual}");
            worst_spread = worst_spread.max(spread);
            worst_residual = worst_residual.max(residual);
        }
        format!(
            "500 portfolios, worst spread {worst_spread:.2e}, worst residual {worst_residual:.2e}"
        )
    });
}

#[test]
fn criterion_2_integer_grid_oracle() {
    run_criterion(2, "closed form vs exhaustive integer-grid enumeration", 30.0, || {
        let sigmas = [1.0, 1.8, 0.6];
        let deltas = [0.35, 0.9, 0.4];
        let (budget, alpha) = (300.0, 0.05);
        let portfolio = known_portfolio(&sigmas, &deltas, budget, alpha);
        let closed = power::optimal_max_type2(&portfolio).unwrap();
        let continuous = power_optimal_allocation(&portfolio).unwrap();

        let mut grid_best = f64::INFINITY;
        for n1 in 0..=300u32 {
            for n2 in 0..=(300 - n1) {
                let n3 = 300 - n1 - n2;
                let worst = type2_error(sigmas[0], f64::from(n1), deltas[0], alpha)
                    .unwrap()
                    .max(type2_error(sigmas[1], f64::from(n2), deltas[1], alpha).unwrap())
                    .max(type2_error(sigmas[2], f64::from(n3), deltas[2], alpha).unwrap());
                grid_best = grid_best.min(worst);
            }
        }
        // resolution bound from the error's sensitivity near the optimum:
        // the rounded continuous solution moves each coordinate by < 1,
        // shifting its error by at most the local slope
        let q = special::std_normal_quantile(1.0 - alpha).unwrap();
        let mut lipschitz = 0.0f64;
        for i in 0..3 {
            for offset in [-1.0, 0.0, 1.0] {
                let n = (continuous.n[i] + offset).max(1.0);
                let slope = special::std_normal_pdf(q - deltas[i] * n.sqrt() / sigmas[i])
                    * deltas[i]
                    / (2.0 * sigmas[i] * n.sqrt());
                lipschitz = lipschitz.max(slope);
            }
        }
        assert!(closed <= grid_best + 1e-12, "closed {closed} above grid best {grid_best}");
        assert!(
            grid_best <= closed + lipschitz,
            "grid best {grid_best} exceeds closed {closed} + resolution bound {lipschitz:.3e}"
        );
        format!(
            "closed {closed:.6} <= grid {grid_best:.6} <= closed + {lipschitz:.2e}"
        )
    });
}

#[test]
fn criterion_3_known_sigma_comparison_reproduction() {
    run_criterion(3, "known-sigma comparison at the published budget point", 60.0, || {
        let mut cfg = StudyConfig::known_sigma_default();
        cfg.replicates = 200;
        cfg.grid = vec![80_000.0];
        let report = sim::compare_known_sigma(&cfg).unwrap();
        let reps = report.table("replicates").unwrap();
        let gap_idx = reps.columns.iter().position(|c| c == "gap").unwrap();
        for row in &reps.rows {
            assert!(row[gap_idx] >= -1e-12, "dominance violated on replicate {}", row[0]);
        }
        let mean_gap = report.table("summary").unwrap().column("mean_gap").unwrap()[0];
        assert!(
            (0.45..=0.80).contains(&mean_gap),
            "mean gap {mean_gap} outside [0.45, 0.80]"
        );
        format!("mean gap at N=80k is {mean_gap:.3}, dominance on all 200 replicates")
    });
}

#[test]
fn criterion_4_pair_tolerance_coverage() {
    run_criterion(4, "two-experiment tolerance optimum coverage", 20.0, || {
        let inst = PairInstance::new(1.0, 4.0, 20, 200.0, 0.05).unwrap();
        let gamma = 0.9;
        let opt = tolerance_optimum(gamma, &inst).unwrap();
        let d_star = opt.d_star.unwrap();
        let mc = pair::simulate_coverage(opt.r_star, d_star, &inst, 400_000, 4004);
        assert!((mc - gamma).abs() <= 0.01, "Monte Carlo coverage {mc} not within 0.9 ± 0.01");
        let h_star = coverage_probability(opt.r_star, d_star, &inst).unwrap();
        for &r in util::geomspace(1e-3, 1e3, 601).iter() {
            let h = coverage_probability(r, d_star, &inst).unwrap();
            assert!(h_star >= h - 1e-10, "H({r:.4}) = {h} beats the maximizer {h_star}");
        }
        format!("MC coverage {mc:.4} vs target 0.9; maximizer dominates 601-point grid")
    });
}

#[test]
fn criterion_5_sign_and_monotonicity_suite() {
    run_criterion(5, "inflation-ratio sign patterns and monotonicity", 120.0, || {
        let mut rng = common::rng(5005);
        let mut checks = 0u32;

        // sign of log r* matches sign of a2 - a1 for all three criteria
        for _ in 0..50 {
            let a1 = common::uniform(&mut rng, 0.2, 5.0);
            let mut a2 = common::uniform(&mut rng, 0.2, 5.0);
            if (a1 / a2 - 1.0).abs() < 0.1 {
                a2 *= 1.5; // keep the instances clearly asymmetric
            }
            let eps = 5 + (common::uniform(&mut rng, 0.0, 95.0) as u32);
            let inst = PairInstance::new(a1, a2, eps, 150.0, 0.05).unwrap();
            let beta_star = inst.optimal_beta().unwrap();
            let want = (a2 - a1).signum();

            let gamma = common::uniform(&mut rng, 0.3, 0.95);
            let r_tol = tolerance_optimum(gamma, &inst).unwrap().r_star;
            assert_eq!(r_tol.ln().signum(), want, "tolerance sign at a=({a1},{a2})");

            let ceiling = 1.0 - inst.alpha - beta_star;
            let delta = common::uniform(&mut rng, 0.05, 0.9) * ceiling;
            let r_conf = pair::confidence_optimum(delta, &inst, beta_star).unwrap().r_star;
            assert_eq!(r_conf.ln().signum(), want, "confidence sign at a=({a1},{a2})");

            let r_exp = expectation_optimum(&inst).unwrap().r_star;
            assert_eq!(r_exp.ln().signum(), want, "expectation sign at a=({a1},{a2})");
            checks += 3;
        }

        // with a1 < a2 the optimal ratio grows with the coverage target
        // (tolerance criterion) and with the tolerance (confidence
        // criterion)
        for _ in 0..50 {
            let a1 = common::uniform(&mut rng, 0.2, 2.0);
            let a2 = a1 * common::uniform(&mut rng, 1.3, 4.0);
            let eps = 5 + (common::uniform(&mut rng, 0.0, 95.0) as u32);
            let inst = PairInstance::new(a1, a2, eps, 150.0, 0.05).unwrap();
            let beta_star = inst.optimal_beta().unwrap();
            let mut prev = 0.0;
            for step in 0..10 {
                let gamma = 0.5 + 0.05 * f64::from(step);
                let r = tolerance_optimum(gamma, &inst).unwrap().r_star;
                assert!(r >= prev - 1e-12, "tolerance ratio fell at gamma={gamma}");
                prev = r;
            }
            let ceiling = 1.0 - inst.alpha - beta_star;
            let mut prev = 0.0;
            for step in 1..=10 {
                let delta = ceiling * f64::from(step) / 11.0;
                let r = pair::confidence_optimum(delta, &inst, beta_star).unwrap().r_star;
                assert!(r >= prev - 1e-12, "confidence ratio fell at delta={delta}");
                prev = r;
            }
            checks += 2;
        }

        // sorted difficulty indices get reverse-sorted confidence levels
        // from all three portfolio solvers
        for _ in 0..50 {
            let m = 3 + (common::uniform(&mut rng, 0.0, 5.0) as usize);
            let mut a: Vec<f64> =
                (0..m).map(|_| common::uniform(&mut rng, 0.3, 6.0)).collect();
            a.sort_by(|x, y| x.partial_cmp(y).unwrap());
            let eps = vec![20u32; m];
            let budget = 3.0 * a.iter().sum::<f64>();
            let beta_star = optimal_max_type2_from(&a, budget, 0.05).unwrap();
            let plans = [
                solve_tolerance(&a, &eps, 0.7, budget, 0.05).unwrap(),
                solve_confidence(&a, &eps, 0.15, budget, 0.05, beta_star).unwrap(),
                solve_expectation(&a, &eps, budget, 0.05).unwrap(),
            ];
            for plan in &plans {
                for w in plan.c.windows(2) {
                    assert!(
                        w[0] >= w[1] - 1e-10,
                        "confidence ordering violated: {:?} for difficulties {a:?}",
                        plan.c
                    );
                }
            }
            checks += 3;
        }
        format!("{checks} randomized structural checks, zero violations")
    });
}

#[test]
fn criterion_6_f_kernel_identities() {
    run_criterion(6, "symmetric-F identities and quantile roundtrips", 5.0, || {
        for &nu in &[3.0, 9.0, 19.0, 49.0, 199.0] {
            assert!(
                (special::f_quantile(0.5, nu).unwrap() - 1.0).abs() < 1e-10,
                "median off at nu={nu}"
            );
            assert!((special::f_cdf(1.0, nu).unwrap() - 0.5).abs() < 1e-10);
            for &x in &[0.02, 0.1, 0.5, 1.0, 2.3, 9.0, 45.0] {
                let s = special::f_cdf(x, nu).unwrap() + special::f_cdf(1.0 / x, nu).unwrap();
                assert!((s - 1.0).abs() < 1e-12, "reflection at nu={nu}, x={x}: {s}");
            }
            // quantile/CDF roundtrips on a probability grid, both the
            // p-residual and the recovered abscissa
            for &p in util::linspace(1e-6, 1.0 - 1e-6, 101).iter() {
                let x = special::f_quantile(p, nu).unwrap();
                let back = special::f_cdf(x, nu).unwrap();
                assert!((back - p).abs() < 1e-9, "nu={nu} p={p}: residual {}", back - p);
                let x2 = special::f_quantile(back, nu).unwrap();
                assert!(
                    (x2 - x).abs() < 1e-9 * (1.0 + x),
                    "nu={nu} p={p}: abscissa moved {x} -> {x2}"
                );
                let qc = special::chi2_quantile(p, nu).unwrap();
                assert!((special::chi2_cdf(qc, nu).unwrap() - p).abs() < 1e-9);
            }
        }
        "median, reflection, and 101-point roundtrips for five pilot laws".to_string()
    });
}

#[test]
fn criterion_7_coverage_and_feasibility() {
    run_criterion(7, "interval coverage and certified-plan feasibility", 90.0, || {
        let sigmas: [f64; 5] = [0.9, 1.3, 0.5, 1.7, 1.1];
        let deltas: [f64; 5] = [0.4, 0.5, 0.25, 0.8, 0.3];
        let (budget, alpha, eps) = (250.0, 0.05, 20u32);
        let a: Vec<f64> = sigmas.iter().zip(&deltas).map(|(s, d)| (s / d).powi(2)).collect();
        let epsilons = vec![eps; 5];
        let gamma = 0.7;
        let tol_plan = solve_tolerance(&a, &epsilons, gamma, budget, alpha).unwrap();
        let beta_star = optimal_max_type2_from(&a, budget, alpha).unwrap();
        let delta_conf = 0.2;
        let conf_plan =
            solve_confidence(&a, &epsilons, delta_conf, budget, alpha, beta_star).unwrap();
        let bounds: Vec<(f64, f64)> = tol_plan
            .c
            .iter()
            .map(|&c| {
                let pair = robust::scaling_factors(eps, c).unwrap();
                (pair.lower, pair.upper)
            })
            .collect();

        let replicates = 100_000u32;
        let mut rng = common::rng(7007);
        let mut event_hits = 0u32;
        let mut tol_within = 0u32;
        let mut conf_within = 0u32;
        for _ in 0..replicates {
            let pilots: Vec<f64> =
                sigmas.iter().map(|&s| common::draw_pilot_sd(s, eps, &mut rng)).collect();
            let on_event = (0..5).all(|i| {
                let s2 = pilots[i] * pilots[i];
                let var = sigmas[i] * sigmas[i];
                bounds[i].0 * s2 <= var && var <= bounds[i].1 * s2
            });
            if on_event {
                event_hits += 1;
            }
            let tol_realized = power::realized_max_type2(
                &tol_plan.k,
                &pilots,
                &sigmas,
                &deltas,
                budget,
                alpha,
            )
            .unwrap();
            if tol_realized - beta_star <= tol_plan.objective_value {
                tol_within += 1;
            }
            let conf_realized = power::realized_max_type2(
                &conf_plan.k,
                &pilots,
                &sigmas,
                &deltas,
                budget,
                alpha,
            )
            .unwrap();
            if conf_realized - beta_star <= delta_conf {
                conf_within += 1;
            }
        }
        let event_rate = f64::from(event_hits) / f64::from(replicates);
        assert!(
            (event_rate - tol_plan.certified_gamma).abs() <= 0.01,
            "coverage-event rate {event_rate} vs certified {}",
            tol_plan.certified_gamma
        );
        let tol_rate = f64::from(tol_within) / f64::from(replicates);
        assert!(tol_rate >= gamma - 0.01, "tolerance feasibility {tol_rate} < {gamma} - 0.01");
        let conf_rate = f64::from(conf_within) / f64::from(replicates);
        assert!(
            conf_rate >= conf_plan.certified_gamma - 0.01,
            "confidence feasibility {conf_rate} < certified {}",
            conf_plan.certified_gamma
        );
        format!(
            "event rate {event_rate:.4} ≈ {:.4}; P(excess ≤ δ^R) = {tol_rate:.4} ≥ {gamma}; \
             realized confidence {conf_rate:.4} ≥ certified {:.4}",
            tol_plan.certified_gamma, conf_plan.certified_gamma
        )
    });
}

#[test]
fn criterion_8_policy_comparison_reproduction() {
    run_criterion(8, "policy-comparison studies on the default portfolio", 180.0, || {
        let mut cfg = StudyConfig::unknown_sigma_default();
        cfg.replicates = 500;

        let tol_report =
            sim::compare_unknown_sigma(&cfg, &SurrogateObjective::Tolerance { gamma: cfg.gamma })
                .unwrap();
        let tol = tol_report.table("summary").unwrap();
        let p70_naive = tol.column("p70_naive").unwrap()[0];
        let p70_ss = tol.column("p70_surrogate_s").unwrap()[0];
        assert!(
            p70_ss < p70_naive,
            "70th percentile: surrogate {p70_ss} not below naive {p70_naive}"
        );

        let conf_report = sim::compare_unknown_sigma(
            &cfg,
            &SurrogateObjective::Confidence { delta: cfg.delta_tol },
        )
        .unwrap();
        let conf = conf_report.table("summary").unwrap();
        let within_naive = conf.column("within_delta_naive").unwrap()[0];
        let within_ss = conf.column("within_delta_surrogate_s").unwrap()[0];
        assert!(
            within_ss - within_naive >= 0.2,
            "within-tolerance gap {:.3} below 0.2",
            within_ss - within_naive
        );

        let exp_report =
            sim::compare_unknown_sigma(&cfg, &SurrogateObjective::Expectation).unwrap();
        let exp = exp_report.table("summary").unwrap();
        let mean_naive = exp.column("mean_naive").unwrap()[0];
        let mean_ss = exp.column("mean_surrogate_s").unwrap()[0];
        assert!(mean_ss < mean_naive, "mean excess: surrogate {mean_ss} vs naive {mean_naive}");

        format!(
            "p70 {p70_ss:.3} < {p70_naive:.3}; within-δ {within_ss:.3} vs {within_naive:.3}; \
             mean {mean_ss:.3} < {mean_naive:.3}"
        )
    });
}

#[test]
fn criterion_9_large_pilot_limits() {
    run_criterion(9, "large-pilot limits of the three surrogate programs", 10.0, || {
        let a = [1.0, 2.0, 0.5, 1.7, 3.2];
        let epsilons = [10_000u32; 5];
        let (budget, alpha) = (6.0, 0.05);
        let beta_star = optimal_max_type2_from(&a, budget, alpha).unwrap();

        let tol = solve_tolerance(&a, &epsilons, 0.7, budget, alpha).unwrap();
        assert!(tol.objective_value < 0.02, "tolerance {} >= 0.02", tol.objective_value);

        let conf = solve_confidence(&a, &epsilons, 0.1, budget, alpha, beta_star).unwrap();
        assert!(conf.certified_gamma > 0.98, "confidence {} <= 0.98", conf.certified_gamma);

        let exp = solve_expectation(&a, &epsilons, budget, alpha).unwrap();
        let gap = exp.objective_value - beta_star;
        assert!(gap < 0.02, "expectation gap {gap} >= 0.02");

        format!(
            "δ^R = {:.4} < 0.02; γ^R = {:.6} > 0.98; g^R - β* = {gap:.4} < 0.02",
            tol.objective_value, conf.certified_gamma
        )
    });
}
