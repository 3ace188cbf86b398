//! Scenario runs: plant, metering and the three estimators over a horizon,
//! with metrics, the pointwise performance-criterion check, parameter
//! sweeps and the five-row method comparison.

use std::collections::VecDeque;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::{
    kalman_baseline_step, open_loop_estimate, robust_step, KalmanBaselineParams,
    RobustFilterState,
};
use crate::metering::{alinea_integral, meter, queue_override, MeteringParams};
use crate::plant::{
    measure, noise_rng, occupancy_proxy, FlowRecord, Measurement, NoiseSpec, OccupancyParams,
    PenetrationMode, PenetrationSpec, Plant, Profile, QueueState,
};
use crate::sdp::{solve_p1, FilterDesign, SolveOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Estimator {
    Robust,
    OpenLoop,
    Kalman,
}

impl Estimator {
    pub const ALL: [Estimator; 3] = [Estimator::Robust, Estimator::OpenLoop, Estimator::Kalman];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Estimator::Robust => "robust",
            Estimator::OpenLoop => "open_loop",
            Estimator::Kalman => "kalman",
        }
    }
}

/// Filter state at the first post-warmup cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitMode {
    Zero,
    Truth,
    /// `(Q/2, alpha Q/2)`
    Half,
}

impl std::str::FromStr for InitMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "zero" => Ok(Self::Zero),
            "truth" => Ok(Self::Truth),
            "half" => Ok(Self::Half),
            other => Err(format!("unknown init mode `{other}`")),
        }
    }
}

impl std::fmt::Display for InitMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Zero => "zero",
            Self::Truth => "truth",
            Self::Half => "half",
        })
    }
}

/// How the empirical relative error aggregates over cycles.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mu1HatMode {
    /// `Σ‖e‖² / Σ‖x‖²`
    RatioOfSums,
    /// Mean over cycles with `x ≠ 0` of `‖e‖² / ‖x‖²`.
    SumOfRatios,
}

impl std::str::FromStr for Mu1HatMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "ratio-of-sums" => Ok(Self::RatioOfSums),
            "sum-of-ratios" => Ok(Self::SumOfRatios),
            other => Err(format!("unknown mu1_hat mode `{other}`")),
        }
    }
}

impl std::fmt::Display for Mu1HatMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::RatioOfSums => "ratio-of-sums",
            Self::SumOfRatios => "sum-of-ratios",
        })
    }
}

/// `[solver]`
#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub beta: f64,
    pub delta_t: f64,
    /// Θ used for synthesis.
    pub theta_bound: f64,
    pub epsilon: f64,
    pub tol: f64,
    pub mu1_cap: f64,
    /// Inline design `(L1, L2, P11, P12, P22, mu1, mu2, mu3)`; solved when absent.
    pub inline: Option<[f64; 8]>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            beta: 0.1,
            delta_t: 1.0 / 120.0,
            theta_bound: 0.08,
            epsilon: 1e-7,
            tol: 1e-6,
            mu1_cap: 1.0,
            inline: None,
        }
    }
}

impl SolverConfig {
    pub fn options(&self) -> SolveOptions {
        SolveOptions {
            epsilon_margin: self.epsilon,
            objective_tol: self.tol,
            mu1_cap: self.mu1_cap,
            ..SolveOptions::default()
        }
    }
}

/// `[plant]`
#[derive(Clone, Debug, PartialEq)]
pub struct PlantConfig {
    pub capacity: usize,
    pub alpha: f64,
    pub mode: PenetrationMode,
    /// Random-walk bound in synthetic mode.
    pub theta_bound: f64,
    pub initial_queue: usize,
    /// Ramp demand, veh/h per cycle segment.
    pub demand: Profile,
    /// Exogenous mainline occupancy per cycle segment.
    pub mainline: Profile,
    pub occupancy_exponent: f64,
    pub occupancy_coupling: f64,
}

impl Default for PlantConfig {
    fn default() -> Self {
        Self {
            capacity: 32,
            alpha: 0.5,
            mode: PenetrationMode::Bernoulli,
            theta_bound: 0.08,
            initial_queue: 16,
            demand: Profile::new(vec![
                (0, 560.0),
                (60, 620.0),
                (180, 700.0),
                (300, 760.0),
                (480, 680.0),
                (600, 600.0),
            ])
            .expect("non-empty"),
            // ALINEA equilibrium sits about 80 veh/h below demand, so the
            // queue stays long and cycles through the override
            mainline: Profile::new(vec![
                (0, 0.18),
                (60, 0.175),
                (180, 0.168),
                (300, 0.163),
                (480, 0.17),
                (600, 0.177),
            ])
            .expect("non-empty"),
            occupancy_exponent: 1.0,
            occupancy_coupling: 0.1,
        }
    }
}

/// `[harness]`
#[derive(Clone, Debug, PartialEq)]
pub struct HarnessConfig {
    pub horizon: usize,
    pub warmup: usize,
    pub seeds: Vec<u64>,
    pub init: InitMode,
    pub clamp: bool,
    pub mu1_hat: Mu1HatMode,
    /// Flow guard of the open-loop estimator, veh/h.
    pub eps_flow: f64,
    /// Cycles of measured flow averaged before the open-loop ratio.
    pub open_loop_window: usize,
    pub kalman_k_f: f64,
    pub kalman_l_veh: f64,
    pub kalman_l_d: f64,
    /// Back-of-queue capacity; the ramp capacity when absent.
    pub kalman_q_bb: Option<f64>,
    pub sweep_alpha: Vec<f64>,
    pub sweep_theta: Vec<f64>,
    pub sweep_flow_bound: Vec<f64>,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        Self {
            horizon: 780,
            warmup: 60,
            seeds: (1..=20).collect(),
            init: InitMode::Half,
            clamp: false,
            mu1_hat: Mu1HatMode::RatioOfSums,
            eps_flow: 1.0,
            open_loop_window: 1,
            kalman_k_f: 0.1,
            kalman_l_veh: 5.0,
            kalman_l_d: 2.0,
            kalman_q_bb: None,
            sweep_alpha: vec![0.1, 0.3, 0.5, 0.7, 0.9],
            sweep_theta: vec![0.08],
            sweep_flow_bound: vec![60.0, 90.0, 120.0, 150.0, 180.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub solver: SolverConfig,
    pub plant: PlantConfig,
    pub noise: NoiseSpec,
    pub metering: MeteringParams,
    pub harness: HarnessConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            solver: SolverConfig::default(),
            plant: PlantConfig::default(),
            noise: NoiseSpec {
                window: (240, 480),
                flow_bound: 60.0,
                count_bound: 2.0,
            },
            metering: MeteringParams {
                k_i: 7000.0,
                o_m_target: 0.22,
                o_a_threshold: 0.8,
                r_min: 240.0,
                r_max: 1200.0,
            },
            harness: HarnessConfig::default(),
        }
    }
}

fn check(cond: bool, field: &str, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::validation(field, msg))
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let s = &self.solver;
        check(s.beta > 0.0 && s.beta.is_finite(), "solver.beta", "must be > 0")?;
        check(s.delta_t > 0.0 && s.delta_t.is_finite(), "solver.delta_t", "must be > 0")?;
        check((0.0..1.0).contains(&s.theta_bound), "solver.theta", "must lie in [0, 1)")?;
        check(s.epsilon > 0.0, "solver.epsilon", "must be > 0")?;
        check(s.tol > 0.0, "solver.tol", "must be > 0")?;
        check(s.mu1_cap > 0.0, "solver.mu1_cap", "must be > 0")?;

        let p = &self.plant;
        check(p.capacity > 0, "plant.capacity", "must be > 0")?;
        check(p.alpha > 0.0 && p.alpha <= 1.0, "plant.alpha", "must lie in (0, 1]")?;
        check((0.0..1.0).contains(&p.theta_bound), "plant.theta_bound", "must lie in [0, 1)")?;
        check(p.initial_queue <= p.capacity, "plant.initial_queue", "exceeds capacity")?;
        check(p.occupancy_exponent > 0.0, "plant.occupancy_exponent", "must be > 0")?;
        check(
            p.demand.segments().iter().all(|s| s.1 >= 0.0 && s.1.is_finite()),
            "plant.demand",
            "rates must be finite and >= 0",
        )?;

        self.noise.validate()?;
        self.metering.validate()?;

        let h = &self.harness;
        check(h.warmup < h.horizon, "harness.warmup", "must be below the horizon")?;
        check(!h.seeds.is_empty(), "harness.seeds", "need at least one seed")?;
        check(h.eps_flow >= 0.0, "harness.eps_flow", "must be >= 0")?;
        check(h.open_loop_window > 0, "harness.open_loop_window", "must be > 0")?;
        check(
            h.kalman_k_f > 0.0 && h.kalman_k_f <= 1.0,
            "harness.kalman_k_f",
            "must lie in (0, 1]",
        )?;
        check(h.kalman_l_veh > 0.0, "harness.kalman_l_veh", "must be > 0")?;
        check(h.kalman_l_d > 0.0, "harness.kalman_l_d", "must be > 0")?;
        if let Some(q) = h.kalman_q_bb {
            check(q > 0.0, "harness.kalman_q_bb", "must be > 0")?;
        }
        Ok(())
    }

    /// Same scenario at another market penetration rate.
    pub fn with_alpha(&self, alpha: f64) -> Self {
        let mut c = self.clone();
        c.plant.alpha = alpha;
        c
    }

    pub fn kalman_params(&self) -> KalmanBaselineParams {
        let q = self.plant.capacity as f64;
        KalmanBaselineParams {
            k_f: self.harness.kalman_k_f,
            l_veh: self.harness.kalman_l_veh,
            l_d: self.harness.kalman_l_d,
            q_bb: self.harness.kalman_q_bb.unwrap_or(q),
            q,
        }
    }

    fn occupancy_params(&self) -> OccupancyParams {
        OccupancyParams {
            capacity: self.plant.capacity as f64,
            exponent: self.plant.occupancy_exponent,
            coupling: self.plant.occupancy_coupling,
            r_max: self.metering.r_max,
        }
    }

    /// Design for this scenario: the inline certificate if given, otherwise
    /// the solved program at the plant's `alpha`.
    pub fn design(&self) -> Result<FilterDesign> {
        let s = &self.solver;
        match s.inline {
            Some(v) => {
                let mut p = crate::matops::SymMatrix::zeros(2);
                p.set(0, 0, v[2]);
                p.set(0, 1, v[3]);
                p.set(1, 1, v[4]);
                let vars = crate::lmi::LmiVars::from_gain(p, [v[0], v[1]], v[5], v[6], v[7]);
                let d = FilterDesign::from_vars(
                    &vars,
                    self.plant.alpha,
                    s.theta_bound,
                    s.delta_t,
                    s.beta,
                )?;
                d.certify(s.epsilon, s.mu1_cap)?;
                Ok(d)
            }
            None => solve_p1(self.plant.alpha, s.theta_bound, s.delta_t, s.beta, &s.options()),
        }
    }
}

/// One post-warmup cycle.
#[derive(Clone, Debug, PartialEq)]
pub struct CycleRecord {
    pub cycle: usize,
    pub truth: QueueState,
    pub flows: FlowRecord,
    pub meas: Measurement,
    pub w: [f64; 5],
    pub theta: f64,
    /// Indexed by [`Estimator::index`].
    pub estimates: [[f64; 2]; 3],
    pub metering: f64,
}

impl CycleRecord {
    pub fn error(&self, est: Estimator) -> [f64; 2] {
        let e = self.estimates[est.index()];
        [self.truth.x_all - e[0], self.truth.x_cv - e[1]]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace {
    pub seed: u64,
    pub records: Vec<CycleRecord>,
    pub spillback: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Metrics {
    pub rmse: f64,
    pub mu1_hat: f64,
    pub sqrt_mu1_hat: f64,
    /// Only evaluated for the robust filter.
    pub criterion_violations: Option<usize>,
    pub spillback: u64,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub trace: RunTrace,
    /// Indexed by [`Estimator::index`].
    pub metrics: [Metrics; 3],
    pub criterion: Option<CriterionReport>,
    /// Fraction of post-warmup cycles with `x_cv > 0`.
    pub cv_presence: f64,
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Simulates one seed. Metrics cover post-warmup cycles only.
pub fn run_scenario(cfg: &ScenarioConfig, design: &FilterDesign, seed: u64) -> Result<RunOutput> {
    cfg.validate()?;
    let q = cfg.plant.capacity as f64;
    let alpha = cfg.plant.alpha;
    let pen = PenetrationSpec {
        mode: cfg.plant.mode,
        alpha,
        theta_bound: cfg.plant.theta_bound,
        seed,
    };
    let mut plant = Plant::new(cfg.plant.capacity, cfg.solver.delta_t, pen)?
        .with_initial_queue(cfg.plant.initial_queue);
    let mut noise = noise_rng(seed);
    let occ = cfg.occupancy_params();
    let kalman = cfg.kalman_params();
    let mp = &cfg.metering;

    let mut r_i = mp.r_max;
    let mut r_prev = mp.r_max;
    let mut robust = RobustFilterState::default();
    let mut open_loop = 0.0;
    let mut kal = 0.0;
    let mut recent: VecDeque<[f64; 4]> = VecDeque::with_capacity(cfg.harness.open_loop_window);
    let mut records = Vec::with_capacity(cfg.harness.horizon - cfg.harness.warmup);

    for t in 0..cfg.harness.horizon {
        let x = plant.state();
        let theta = plant.theta();
        let (o_a, o_m) = occupancy_proxy(&x, cfg.plant.mainline.at(t), r_prev, &occ);
        r_i = alinea_integral(r_i, o_m, mp);
        let r = meter(r_i, queue_override(o_a, mp));
        r_prev = r;

        let arrivals = plant.draw_arrivals(cfg.plant.demand.at(t));
        let (_, flows) = plant.step(arrivals, r);
        let (meas, w) = measure(&x, &flows, &cfg.noise, t, &mut noise);

        if recent.len() == cfg.harness.open_loop_window {
            recent.pop_front();
        }
        recent.push_back(meas.flows());
        if t < cfg.harness.warmup {
            continue;
        }
        if t == cfg.harness.warmup {
            let init = match cfg.harness.init {
                InitMode::Zero => [0.0, 0.0],
                InitMode::Truth => x.as_array(),
                InitMode::Half => [q / 2.0, alpha * q / 2.0],
            };
            robust = RobustFilterState { xhat: init };
            open_loop = init[0];
            kal = init[0];
        }
        let k = recent.len() as f64;
        let avg = |i: usize| recent.iter().map(|f| f[i]).sum::<f64>() / k;
        let pooled = Measurement {
            f_all_in: avg(0),
            f_all_out: avg(1),
            f_cv_in: avg(2),
            f_cv_out: avg(3),
            x_cv: meas.x_cv,
        };
        open_loop = open_loop_estimate(&pooled, open_loop, cfg.harness.eps_flow);
        records.push(CycleRecord {
            cycle: t,
            truth: x,
            flows,
            meas,
            w,
            theta,
            estimates: [robust.xhat, [open_loop, meas.x_cv], [kal, alpha * kal]],
            metering: r,
        });
        robust = robust_step(design, &robust, meas.flows(), meas.x_cv);
        if cfg.harness.clamp {
            robust = robust.clamped(q);
        }
        kal = kalman_baseline_step(kal, &meas, o_a, &kalman, cfg.solver.delta_t);
    }

    let trace = RunTrace {
        seed,
        records,
        spillback: plant.spillback(),
    };
    let criterion = (!cfg.harness.clamp).then(|| criterion_check(&trace, design));
    let metrics = Estimator::ALL.map(|est| {
        let mu1 = mu1_hat_with(&trace, est, cfg.harness.mu1_hat).unwrap_or(f64::NAN);
        Metrics {
            rmse: rmse(&trace, est),
            mu1_hat: mu1,
            sqrt_mu1_hat: mu1.sqrt(),
            criterion_violations: match est {
                Estimator::Robust => criterion.as_ref().map(|c| c.violations),
                _ => None,
            },
            spillback: trace.spillback,
        }
    });
    let n = trace.records.len().max(1) as f64;
    let cv_presence = trace.records.iter().filter(|r| r.truth.x_cv > 0.0).count() as f64 / n;
    Ok(RunOutput {
        trace,
        metrics,
        criterion,
        cv_presence,
    })
}

/// Runs every configured seed in parallel; output order follows the seed list.
pub fn run_replications(cfg: &ScenarioConfig, design: &FilterDesign) -> Result<Vec<RunOutput>> {
    cfg.harness
        .seeds
        .par_iter()
        .map(|&s| run_scenario(cfg, design, s))
        .collect()
}

/// Root-mean-square error of the `x_all` component.
pub fn rmse(trace: &RunTrace, est: Estimator) -> f64 {
    let n = trace.records.len();
    if n == 0 {
        return 0.0;
    }
    let s: f64 = trace.records.iter().map(|r| r.error(est)[0].powi(2)).sum();
    (s / n as f64).sqrt()
}

/// Empirical relative error energy `Σ‖e‖² / Σ‖x‖²`.
pub fn mu1_hat(trace: &RunTrace, est: Estimator) -> Result<f64> {
    mu1_hat_with(trace, est, Mu1HatMode::RatioOfSums)
}

pub fn mu1_hat_with(trace: &RunTrace, est: Estimator, mode: Mu1HatMode) -> Result<f64> {
    let pairs = trace
        .records
        .iter()
        .map(|r| (norm2(&r.error(est)), norm2(&r.truth.as_array())));
    match mode {
        Mu1HatMode::RatioOfSums => {
            let (se, sx) = pairs.fold((0.0, 0.0), |(a, b), (e, x)| (a + e, b + x));
            if sx == 0.0 {
                return Err(Error::DegenerateTruth);
            }
            Ok(se / sx)
        }
        Mu1HatMode::SumOfRatios => {
            let ratios: Vec<f64> = pairs.filter(|p| p.1 > 0.0).map(|(e, x)| e / x).collect();
            if ratios.is_empty() {
                return Err(Error::DegenerateTruth);
            }
            Ok(ratios.iter().sum::<f64>() / ratios.len() as f64)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriterionReport {
    /// Cumulative `Σ‖e‖²` up to each T.
    pub lhs: Vec<f64>,
    /// `mu1 Σ‖x‖² + mu2 Σ‖w‖² + e(0)ᵀ P e(0)` up to each T.
    pub rhs: Vec<f64>,
    pub holds: Vec<bool>,
    pub violations: usize,
}

/// Checks the finite-horizon performance bound of the robust filter at
/// every horizon T of the trace.
pub fn criterion_check(trace: &RunTrace, design: &FilterDesign) -> CriterionReport {
    let n = trace.records.len();
    let mut out = CriterionReport {
        lhs: Vec::with_capacity(n),
        rhs: Vec::with_capacity(n),
        holds: Vec::with_capacity(n),
        violations: 0,
    };
    let Some(first) = trace.records.first() else {
        return out;
    };
    let v0 = design.p.quad_form(&first.error(Estimator::Robust));
    let (mut se, mut sx, mut sw) = (0.0, 0.0, 0.0);
    for r in &trace.records {
        se += norm2(&r.error(Estimator::Robust));
        sx += norm2(&r.truth.as_array());
        sw += norm2(&r.w);
        let rhs = design.mu1 * sx + design.mu2 * sw + v0;
        let ok = se <= rhs * (1.0 + 1e-12);
        out.lhs.push(se);
        out.rhs.push(rhs);
        out.holds.push(ok);
        if !ok {
            out.violations += 1;
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub alpha: f64,
    pub theta: f64,
    pub flow_bound: f64,
    /// `None` when synthesis failed; see `error`.
    pub sqrt_mu1: Option<f64>,
    pub mean_sqrt_mu1_hat: Option<f64>,
    pub mean_rmse: Option<f64>,
    pub error: Option<String>,
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n.max(1) as f64
}

/// One synthesis plus one run per seed for every `(alpha, theta, U)` cell.
/// Cells are ordered alpha-major, then theta, then U. Every cell uses the
/// same seed list, so plant randomness is matched across cells.
pub fn sweep(base: &ScenarioConfig) -> Result<Vec<SweepRow>> {
    base.validate()?;
    let h = &base.harness;
    if h.sweep_alpha.is_empty() || h.sweep_theta.is_empty() || h.sweep_flow_bound.is_empty() {
        return Err(Error::validation("harness.sweep_*", "grid must be non-empty"));
    }
    let mut designs = Vec::new();
    for &alpha in &h.sweep_alpha {
        for &theta in &h.sweep_theta {
            let mut c = base.with_alpha(alpha);
            c.solver.theta_bound = theta;
            c.solver.inline = None;
            if c.plant.mode == PenetrationMode::SyntheticTheta {
                c.plant.theta_bound = theta;
            }
            designs.push((c.clone(), c.design()));
        }
    }
    let cells: Vec<(usize, f64)> = (0..designs.len())
        .flat_map(|i| h.sweep_flow_bound.iter().map(move |&u| (i, u)))
        .collect();
    cells
        .par_iter()
        .map(|&(i, u)| {
            let (cfg, design) = &designs[i];
            let mut row = SweepRow {
                alpha: cfg.plant.alpha,
                theta: cfg.solver.theta_bound,
                flow_bound: u,
                sqrt_mu1: None,
                mean_sqrt_mu1_hat: None,
                mean_rmse: None,
                error: None,
            };
            let design = match design {
                Ok(d) => d,
                Err(e) => {
                    row.error = Some(e.to_string());
                    return Ok(row);
                }
            };
            let mut cfg = cfg.clone();
            cfg.noise.flow_bound = u;
            let runs = run_replications(&cfg, design)?;
            let m = |f: fn(&Metrics) -> f64| mean(runs.iter().map(|r| f(&r.metrics[0])));
            row.sqrt_mu1 = Some(design.sqrt_mu1());
            row.mean_sqrt_mu1_hat = Some(m(|m| m.sqrt_mu1_hat));
            row.mean_rmse = Some(m(|m| m.rmse));
            Ok(row)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareRow {
    pub scenario: &'static str,
    pub estimator: Estimator,
    pub alpha: f64,
    pub mean_sqrt_mu1_hat: f64,
    pub mean_rmse: f64,
}

/// The five-row comparison: open loop and robust filter at alpha 0.25 and
/// 0.5, plus the occupancy baseline, on matched seeds.
pub fn compare_scenarios(base: &ScenarioConfig) -> Result<Vec<CompareRow>> {
    base.validate()?;
    let run = |alpha: f64| -> Result<Vec<RunOutput>> {
        let mut cfg = base.with_alpha(alpha);
        cfg.solver.inline = None;
        let design = cfg.design()?;
        run_replications(&cfg, &design)
    };
    let low = run(0.25)?;
    let high = run(0.5)?;
    let row = |scenario, est: Estimator, alpha, runs: &[RunOutput]| CompareRow {
        scenario,
        estimator: est,
        alpha,
        mean_sqrt_mu1_hat: mean(runs.iter().map(|r| r.metrics[est.index()].sqrt_mu1_hat)),
        mean_rmse: mean(runs.iter().map(|r| r.metrics[est.index()].rmse)),
    };
    Ok(vec![
        row("open_loop_a025", Estimator::OpenLoop, 0.25, &low),
        row("open_loop_a050", Estimator::OpenLoop, 0.5, &high),
        row("kalman", Estimator::Kalman, 0.5, &high),
        row("robust_a025", Estimator::Robust, 0.25, &low),
        row("robust_a050", Estimator::Robust, 0.5, &high),
    ])
}
