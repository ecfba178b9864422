//! Behavioral checks of the simulation harness: determinism regardless
//! of thread count, conservation of the budget in every emitted
//! allocation, summary/replicate consistency, and CSV round-tripping of
//! study outputs.

mod common;

use powerplan::report;
use powerplan::robust::SurrogateObjective;
use powerplan::sim::{
    compare_known_sigma, compare_unknown_sigma, expectation_ratio_sweep, tol_conf_ratio_sweep,
    StudyConfig,
};
use powerplan::util;

fn small_unknown_cfg() -> StudyConfig {
    let mut cfg = StudyConfig::unknown_sigma_default();
    cfg.replicates = 16;
    cfg
}

#[test]
fn reports_identical_across_parallelism_degrees() {
    let cfg = small_unknown_cfg();
    let objective = SurrogateObjective::Tolerance { gamma: 0.7 };
    let serial = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| compare_unknown_sigma(&cfg, &objective).unwrap());
    let parallel = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap()
        .install(|| compare_unknown_sigma(&cfg, &objective).unwrap());
    assert_eq!(
        serial.table("replicates").unwrap().rows,
        parallel.table("replicates").unwrap().rows,
        "replicate rows must be bit-identical"
    );
    assert_eq!(
        serial.table("summary").unwrap().rows,
        parallel.table("summary").unwrap().rows
    );
}

#[test]
fn summaries_match_replicate_tables() {
    let cfg = small_unknown_cfg();
    let rep = compare_unknown_sigma(&cfg, &SurrogateObjective::Tolerance { gamma: 0.7 }).unwrap();
    let reps = rep.table("replicates").unwrap();
    let summary = rep.table("summary").unwrap();
    for (pi, policy) in cfg.policies.iter().enumerate() {
        let excess: Vec<f64> = reps.rows.iter().map(|r| r[pi + 1]).collect();
        let mean = summary.column(&format!("mean_{}", policy.as_str())).unwrap()[0];
        assert!((mean - util::mean(&excess)).abs() < 1e-12);
        let p70 = summary.column(&format!("p70_{}", policy.as_str())).unwrap()[0];
        assert!((p70 - util::percentile(&excess, 70.0)).abs() < 1e-12);
        let within = summary.column(&format!("within_delta_{}", policy.as_str())).unwrap()[0];
        let expect =
            excess.iter().filter(|&&e| e <= cfg.delta_tol).count() as f64 / excess.len() as f64;
        assert!((within - expect).abs() < 1e-12);
    }
}

#[test]
fn excess_errors_stay_in_range() {
    let cfg = small_unknown_cfg();
    let rep = compare_unknown_sigma(&cfg, &SurrogateObjective::Confidence { delta: 0.2 }).unwrap();
    let reps = rep.table("replicates").unwrap();
    for row in &reps.rows {
        for &x in &row[1..] {
            assert!(x >= -1e-12, "negative excess {x}");
            assert!(x <= 1.0 - cfg.alpha + 1e-12, "excess {x} above the trivial ceiling");
        }
    }
}

#[test]
fn known_sigma_curves_have_expected_shape() {
    let mut cfg = StudyConfig::known_sigma_default();
    cfg.replicates = 24;
    let rep = compare_known_sigma(&cfg).unwrap();
    let summary = rep.table("summary").unwrap();
    let power = summary.column("mean_beta_power").unwrap();
    let mse = summary.column("mean_beta_mse").unwrap();
    // pointwise dominance carries to the means, both decrease with budget
    for i in 0..power.len() {
        assert!(power[i] <= mse[i] + 1e-12);
        if i > 0 {
            assert!(power[i] <= power[i - 1] + 1e-12);
            assert!(mse[i] <= mse[i - 1] + 1e-12);
        }
    }
}

#[test]
fn study_csv_roundtrips_exactly() {
    let mut cfg = StudyConfig::pair_sweep_default();
    cfg.grid = util::geomspace(0.25, 4.0, 9);
    cfg.gamma_grid = vec![0.6, 0.9];
    cfg.delta_grid = vec![0.1, 0.2];
    let rep = tol_conf_ratio_sweep(&cfg).unwrap();
    for table in &rep.tables {
        let text = report::to_csv(table, &rep.metadata);
        let (back, meta) = report::from_csv(&text, &table.name).unwrap();
        assert_eq!(back.columns, table.columns);
        assert_eq!(meta.len(), rep.metadata.len());
        // emitted text is a fixed point of write/parse/write
        assert_eq!(text, report::to_csv(&back, &meta));
    }
}

#[test]
fn expectation_sweep_flattens_toward_unity_with_pilot_size() {
    let mut cfg = StudyConfig::pair_sweep_default();
    cfg.grid = vec![0.4];
    cfg.epsilon_set = vec![20, 500];
    let rep = expectation_ratio_sweep(&cfg).unwrap();
    let table = rep.table("exp_sweep").unwrap();
    let r20 = table.rows.iter().find(|r| r[1] == 20.0).unwrap()[2];
    let r500 = table.rows.iter().find(|r| r[1] == 500.0).unwrap()[2];
    assert!(r20 > 1.0 && r500 > 1.0);
    assert!((r500 - 1.0).abs() < (r20 - 1.0).abs());
}
