use ramp_sentinel::harness::{
    compare_scenarios, criterion_check, mu1_hat_with, rmse, run_scenario, sweep, Estimator,
    InitMode, Mu1HatMode, ScenarioConfig,
};
use ramp_sentinel::plant::{NoiseSpec, Profile};
use ramp_sentinel::sdp::FilterDesign;
use ramp_sentinel::Error;

fn default_design() -> (ScenarioConfig, FilterDesign) {
    let cfg = ScenarioConfig::default();
    let d = cfg.design().unwrap();
    (cfg, d)
}

fn short(mut cfg: ScenarioConfig) -> ScenarioConfig {
    cfg.harness.seeds = vec![1, 2, 3, 4];
    cfg
}

#[test]
fn empty_ramp_stays_empty() {
    let (mut cfg, d) = default_design();
    cfg.plant.demand = Profile::constant(0.0);
    cfg.plant.initial_queue = 0;
    cfg.harness.init = InitMode::Zero;
    cfg.noise = NoiseSpec::none();
    let run = run_scenario(&cfg, &d, 1).unwrap();
    for est in Estimator::ALL {
        assert_eq!(run.metrics[est.index()].rmse, 0.0);
    }
    assert!(run.trace.records.iter().all(|r| r.estimates.iter().flatten().all(|v| v.abs() < 1e-12)));
    assert!(matches!(
        mu1_hat_with(&run.trace, Estimator::Robust, Mu1HatMode::RatioOfSums),
        Err(Error::DegenerateTruth)
    ));
}

#[test]
fn identical_seeds_give_identical_traces() {
    let (cfg, d) = default_design();
    let a = run_scenario(&cfg, &d, 5).unwrap();
    let b = run_scenario(&cfg, &d, 5).unwrap();
    assert_eq!(a.trace, b.trace);
    assert_eq!(a.metrics, b.metrics);
    let c = run_scenario(&cfg, &d, 6).unwrap();
    assert_ne!(a.trace, c.trace);
}

#[test]
fn records_cover_only_post_warmup_cycles() {
    let (cfg, d) = default_design();
    let run = run_scenario(&cfg, &d, 2).unwrap();
    let recs = &run.trace.records;
    assert_eq!(recs.len(), cfg.harness.horizon - cfg.harness.warmup);
    assert_eq!(recs[0].cycle, cfg.harness.warmup);
    assert!(recs.windows(2).all(|w| w[1].cycle == w[0].cycle + 1));
    for est in Estimator::ALL {
        assert_eq!(run.metrics[est.index()].rmse, rmse(&run.trace, est));
    }
}

#[test]
fn warmup_noise_does_not_reach_metrics() {
    let (mut cfg, d) = default_design();
    cfg.noise = NoiseSpec::none();
    let clean = run_scenario(&cfg, &d, 3).unwrap();
    cfg.noise = NoiseSpec {
        window: (0, cfg.harness.warmup),
        flow_bound: 500.0,
        count_bound: 10.0,
    };
    let noisy = run_scenario(&cfg, &d, 3).unwrap();
    assert_eq!(clean.metrics, noisy.metrics);
}

#[test]
fn noise_is_confined_to_its_window() {
    let (cfg, d) = default_design();
    let run = run_scenario(&cfg, &d, 4).unwrap();
    for r in &run.trace.records {
        let inside = cfg.noise.active(r.cycle);
        let nonzero = r.w.iter().any(|&w| w != 0.0);
        assert!(inside || !nonzero);
        assert!(r.w[..4].iter().all(|w| w.abs() <= cfg.noise.flow_bound));
        assert!(r.w[4].abs() <= cfg.noise.count_bound);
    }
}

#[test]
fn without_noise_the_bound_setting_is_irrelevant() {
    let (mut cfg, d) = default_design();
    cfg.noise.window = (0, 0);
    cfg.noise.flow_bound = 60.0;
    let a = run_scenario(&cfg, &d, 8).unwrap();
    cfg.noise.flow_bound = 180.0;
    let b = run_scenario(&cfg, &d, 8).unwrap();
    assert_eq!(a.metrics[0].sqrt_mu1_hat, b.metrics[0].sqrt_mu1_hat);
}

#[test]
fn criterion_first_horizon_is_dominated_by_the_lyapunov_term() {
    let (mut cfg, d) = default_design();
    cfg.harness.init = InitMode::Zero;
    let run = run_scenario(&cfg, &d, 9).unwrap();
    let c = criterion_check(&run.trace, &d);
    assert!(c.holds[0]);
    let e0 = run.trace.records[0].error(Estimator::Robust);
    assert!(e0[0] * e0[0] + e0[1] * e0[1] <= d.p.quad_form(&e0));
    assert_eq!(c.violations, 0);
}

#[test]
fn clamping_disables_the_criterion_report() {
    let (mut cfg, d) = default_design();
    cfg.harness.clamp = true;
    let run = run_scenario(&cfg, &d, 1).unwrap();
    assert!(run.criterion.is_none());
    assert!(run.trace.records.iter().all(|r| r.estimates[0].iter().all(|v| (0.0..=32.0).contains(v))));
}

#[test]
fn sum_of_ratios_is_available() {
    let (mut cfg, d) = default_design();
    cfg.harness.mu1_hat = Mu1HatMode::SumOfRatios;
    let run = run_scenario(&cfg, &d, 1).unwrap();
    let m = run.metrics[0].mu1_hat;
    assert!(m.is_finite() && m >= 0.0);
    assert_eq!(m, mu1_hat_with(&run.trace, Estimator::Robust, Mu1HatMode::SumOfRatios).unwrap());
}

#[test]
fn sweep_marks_infeasible_cells_and_keeps_order() {
    let mut cfg = short(ScenarioConfig::default());
    cfg.harness.sweep_alpha = vec![0.01, 0.5];
    cfg.harness.sweep_theta = vec![0.9, 0.08];
    cfg.harness.sweep_flow_bound = vec![60.0, 120.0];
    let rows = sweep(&cfg).unwrap();
    assert_eq!(rows.len(), 8);
    let keys: Vec<(f64, f64, f64)> = rows.iter().map(|r| (r.alpha, r.theta, r.flow_bound)).collect();
    assert_eq!(keys[0], (0.01, 0.9, 60.0));
    assert_eq!(keys[1], (0.01, 0.9, 120.0));
    assert_eq!(keys[7], (0.5, 0.08, 120.0));
    assert!(rows[0].error.is_some() && rows[0].sqrt_mu1.is_none());
    assert!(rows[7].error.is_none() && rows[7].mean_rmse.is_some());
}

#[test]
fn sweep_bound_column_is_non_increasing_in_alpha() {
    let mut cfg = short(ScenarioConfig::default());
    cfg.harness.sweep_flow_bound = vec![60.0];
    let rows = sweep(&cfg).unwrap();
    let b: Vec<f64> = rows.iter().map(|r| r.sqrt_mu1.unwrap()).collect();
    assert!(b.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{b:?}");
}

#[test]
fn compare_reports_five_rows() {
    let rows = compare_scenarios(&short(ScenarioConfig::default())).unwrap();
    let names: Vec<&str> = rows.iter().map(|r| r.scenario).collect();
    assert_eq!(
        names,
        ["open_loop_a025", "open_loop_a050", "kalman", "robust_a025", "robust_a050"]
    );
    assert!(rows.iter().all(|r| r.mean_rmse.is_finite() && r.mean_sqrt_mu1_hat.is_finite()));
}

#[test]
fn invalid_config_is_rejected_with_field() {
    let (mut cfg, d) = default_design();
    cfg.harness.warmup = cfg.harness.horizon;
    match run_scenario(&cfg, &d, 1) {
        Err(Error::Validation { field, .. }) => assert_eq!(field, "harness.warmup"),
        other => panic!("{other:?}"),
    }
}
