//! Seeded checks shared by the property suites and the acceptance target.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ramp_sentinel::harness::{run_scenario, Estimator, InitMode, ScenarioConfig};
use ramp_sentinel::matops::{eigenvalue_oracle, is_negative_definite, SymMatrix};
use ramp_sentinel::metering::mid;
use ramp_sentinel::plant::{NoiseSpec, PenetrationMode, PenetrationSpec, Plant};
use ramp_sentinel::estimators::error_step;
use ramp_sentinel::sdp::FilterDesign;

pub const DT: f64 = 1.0 / 120.0;

/// Random symmetric matrix whose largest eigenvalue is shifted to a random
/// offset in `[-1, 1]`, so both outcomes of the definiteness test occur.
pub fn shifted_symmetric(dim: usize, rng: &mut impl Rng) -> (SymMatrix, f64) {
    let scale: f64 = 10f64.powf(rng.gen_range(-2.0..2.0));
    let entries: Vec<f64> = (0..dim * dim).map(|_| scale * rng.gen_range(-1.0..1.0)).collect();
    let m = SymMatrix::from_upper_fn(dim, |i, j| entries[i * dim + j]);
    let top = *eigenvalue_oracle(&m).unwrap().last().unwrap();
    let offset = scale * rng.gen_range(-1.0..1.0);
    (m.shifted(offset - top), offset)
}

/// Cholesky definiteness agrees with the Jacobi spectrum on `count`
/// matrices over dims {2, 5, 13}. Returns the number of disagreements and
/// the number of cases skipped as numerically ambiguous.
pub fn definiteness_agreement(count: usize, seed: u64) -> (usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut bad, mut skipped) = (0, 0);
    for k in 0..count {
        let dim = [2, 5, 13][k % 3];
        let (m, _) = shifted_symmetric(dim, &mut rng);
        let top = *eigenvalue_oracle(&m).unwrap().last().unwrap();
        if top.abs() <= 1e-8 * m.frobenius_norm() {
            skipped += 1;
            continue;
        }
        if is_negative_definite(&m, 0.0) != (top < 0.0) {
            bad += 1;
        }
    }
    (bad, skipped)
}

/// Drives Bernoulli and synthetic plants with random arrivals and meter
/// rates for `steps` cycles in total, checking capacity, CV bounds, flow
/// conservation of both counts and spillback accounting.
pub fn plant_invariants(steps: usize, seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let per_plant = 10_000;
    let mut done = 0;
    let mut plant_idx = 0u64;
    while done < steps {
        let mode = if plant_idx % 2 == 0 {
            PenetrationMode::Bernoulli
        } else {
            PenetrationMode::SyntheticTheta
        };
        let alpha: f64 = rng.gen_range(0.05..=1.0);
        let theta_bound = rng.gen_range(0.0..=(1.0 - alpha).min(alpha).min(0.2));
        let capacity = rng.gen_range(1..=48);
        let pen = PenetrationSpec {
            mode,
            alpha,
            theta_bound,
            seed: seed ^ plant_idx,
        };
        let mut plant = Plant::new(capacity, DT, pen)
            .map_err(|e| e.to_string())?
            .with_initial_queue(rng.gen_range(0..=capacity));
        plant_idx += 1;
        let q = capacity as f64;
        let n = per_plant.min(steps - done);
        for t in 0..n {
            let before = plant.state();
            let spill_before = plant.spillback();
            let arrivals = rng.gen_range(0..=12u32);
            let rate = rng.gen_range(0.0..2000.0);
            let (after, f) = plant.step(arrivals, rate);
            let ctx = || format!("plant {plant_idx} step {t}: {before:?} -> {after:?}, {f:?}");
            if !(after.x_all >= 0.0 && after.x_all <= q && after.x_all.fract() == 0.0) {
                return Err(format!("capacity: {}", ctx()));
            }
            if !(after.x_cv >= -1e-9 && after.x_cv <= after.x_all + 1e-9) {
                return Err(format!("cv bounds: {}", ctx()));
            }
            if (after.x_all - before.x_all - DT * (f.f_all_in - f.f_all_out)).abs() > 1e-9 {
                return Err(format!("all conservation: {}", ctx()));
            }
            if (after.x_cv - before.x_cv - DT * (f.f_cv_in - f.f_cv_out)).abs() > 1e-9 {
                return Err(format!("cv conservation: {}", ctx()));
            }
            if f.f_all_out * DT > before.x_all + 1e-9 || f.f_all_out * DT > rate * DT + 1.0 + 1e-9 {
                return Err(format!("discharge: {}", ctx()));
            }
            let admitted = (f.f_all_in * DT).round() as u64;
            if admitted + (plant.spillback() - spill_before) != arrivals as u64 {
                return Err(format!("spillback accounting: {}", ctx()));
            }
        }
        done += n;
    }
    Ok(())
}

/// Median operator against sorting on `count` random triples, including
/// repeated values. Returns the number of mismatches.
pub fn mid_vs_sort(count: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .filter(|_| {
            let mut v: [f64; 3] = std::array::from_fn(|_| (rng.gen_range(-50..50) as f64) * 0.5);
            if rng.gen_bool(0.1) {
                v[2] = v[0];
            }
            let got = mid(v[0], v[1], v[2]);
            v.sort_by(f64::total_cmp);
            got != v[1]
        })
        .count()
}

/// Largest residual of `e(t+1) = (A - LC)e(t) + ΔA(θ(t))x(t) + (D - LE)w(t)`
/// over a run of the robust filter, relative to the magnitude of the terms.
pub fn error_identity_residual(cfg: &ScenarioConfig, design: &FilterDesign, seed: u64) -> f64 {
    let run = run_scenario(cfg, design, seed).unwrap();
    let recs = &run.trace.records;
    let mut worst: f64 = 0.0;
    for pair in recs.windows(2) {
        let (r, next) = (&pair[0], &pair[1]);
        let predicted = error_step(design, r.theta, r.error(Estimator::Robust), r.truth.as_array(), r.w);
        let actual = next.error(Estimator::Robust);
        let scale = 1.0
            + r.truth.x_all.abs()
            + r.estimates[0][0].abs()
            + r.estimates[0][1].abs()
            + r.meas.as_array().iter().map(|v| v.abs() * design.delta_t).sum::<f64>();
        for k in 0..2 {
            worst = worst.max((predicted[k] - actual[k]).abs() / scale);
        }
    }
    worst
}

/// Noise-free scenario with a constant exact penetration and the filter
/// started at the truth.
pub fn exact_tracking_config() -> ScenarioConfig {
    let mut cfg = ScenarioConfig::default();
    cfg.noise = NoiseSpec::none();
    cfg.plant.mode = PenetrationMode::SyntheticTheta;
    cfg.plant.theta_bound = 0.0;
    cfg.harness.init = InitMode::Truth;
    cfg.harness.seeds = vec![1, 2, 3];
    cfg
}
