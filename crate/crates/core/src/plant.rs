//! Synthetic on-ramp: a FIFO vehicle queue with CV tagging, capacity
//! clipping, and the five-channel noisy measurement model.
//!
//! Each queued vehicle carries a CV weight. In Bernoulli mode the weight is
//! 0 or 1, drawn with probability `alpha` at admission. In synthetic mode
//! every admitted vehicle carries the fractional weight `alpha + θ(t)` of
//! its admission cycle, so the emergent penetration `x_cv / x_all` is an
//! average of bounded θ values and inherits the bound exactly.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::error::{Error, Result};

/// True queue state in vehicles.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct QueueState {
    pub x_all: f64,
    pub x_cv: f64,
}

impl QueueState {
    pub fn as_array(&self) -> [f64; 2] {
        [self.x_all, self.x_cv]
    }
}

/// Realized flows over one cycle, veh/h.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FlowRecord {
    pub f_all_in: f64,
    pub f_all_out: f64,
    pub f_cv_in: f64,
    pub f_cv_out: f64,
}

impl FlowRecord {
    /// Flow channels in the order of the input vector of the state model.
    pub fn as_array(&self) -> [f64; 4] {
        [self.f_all_in, self.f_all_out, self.f_cv_in, self.f_cv_out]
    }
}

/// Noisy observation: four flow channels (veh/h) and the CV count (veh).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Measurement {
    pub f_all_in: f64,
    pub f_all_out: f64,
    pub f_cv_in: f64,
    pub f_cv_out: f64,
    pub x_cv: f64,
}

impl Measurement {
    pub fn flows(&self) -> [f64; 4] {
        [self.f_all_in, self.f_all_out, self.f_cv_in, self.f_cv_out]
    }

    pub fn as_array(&self) -> [f64; 5] {
        [
            self.f_all_in,
            self.f_all_out,
            self.f_cv_in,
            self.f_cv_out,
            self.x_cv,
        ]
    }

    pub fn scaled(&self, s: f64) -> Self {
        let v = self.as_array().map(|c| c * s);
        Self {
            f_all_in: v[0],
            f_all_out: v[1],
            f_cv_in: v[2],
            f_cv_out: v[3],
            x_cv: v[4],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoiseSpec {
    /// Active cycles `[start, end)`.
    pub window: (usize, usize),
    /// Flow channel bound, veh/h.
    pub flow_bound: f64,
    /// CV count bound, veh.
    pub count_bound: f64,
}

impl NoiseSpec {
    pub fn none() -> Self {
        Self {
            window: (0, 0),
            flow_bound: 0.0,
            count_bound: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.flow_bound >= 0.0 && self.flow_bound.is_finite()) {
            return Err(Error::validation("noise.flow_bound", "must be finite and >= 0"));
        }
        if !(self.count_bound >= 0.0 && self.count_bound.is_finite()) {
            return Err(Error::validation("noise.count_bound", "must be finite and >= 0"));
        }
        Ok(())
    }

    pub fn active(&self, t: usize) -> bool {
        (self.window.0..self.window.1).contains(&t)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PenetrationMode {
    Bernoulli,
    SyntheticTheta,
}

impl std::str::FromStr for PenetrationMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "bernoulli" => Ok(Self::Bernoulli),
            "synthetic" | "synthetic-theta" => Ok(Self::SyntheticTheta),
            other => Err(format!("unknown penetration mode `{other}`")),
        }
    }
}

impl std::fmt::Display for PenetrationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Bernoulli => "bernoulli",
            Self::SyntheticTheta => "synthetic-theta",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PenetrationSpec {
    pub mode: PenetrationMode,
    pub alpha: f64,
    /// Only used in synthetic mode.
    pub theta_bound: f64,
    pub seed: u64,
}

impl PenetrationSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::validation("plant.alpha", "must lie in (0, 1]"));
        }
        if !(self.theta_bound >= 0.0 && self.theta_bound < 1.0) {
            return Err(Error::validation("plant.theta_bound", "must lie in [0, 1)"));
        }
        Ok(())
    }

    /// Effective clamp `min(Θ, α, 1 - α)`.
    pub fn effective_bound(&self) -> f64 {
        self.theta_bound.min(self.alpha).min(1.0 - self.alpha)
    }
}

/// Bounded random walk step of the synthetic penetration fluctuation.
pub fn synthesize_theta(spec: &PenetrationSpec, prev: f64, rng: &mut impl Rng) -> Result<f64> {
    if spec.mode != PenetrationMode::SyntheticTheta {
        return Err(Error::Mode);
    }
    let bound = spec.effective_bound();
    if spec.theta_bound == 0.0 {
        return Ok(0.0);
    }
    let step = Normal::new(0.0, spec.theta_bound / 10.0)
        .expect("sigma is positive and finite")
        .sample(rng);
    Ok((prev + step).clamp(-bound, bound))
}

/// Noisy observation of the recorded truth. Returns the measurement and
/// the noise vector `w` with `measurement = truth + w`.
pub fn measure(
    state: &QueueState,
    flows: &FlowRecord,
    noise: &NoiseSpec,
    t: usize,
    rng: &mut impl Rng,
) -> (Measurement, [f64; 5]) {
    let mut w = [0.0; 5];
    if noise.active(t) {
        // unit draws scaled afterwards so runs that differ only in the
        // bounds consume the same random numbers
        for (k, wk) in w.iter_mut().enumerate() {
            let u: f64 = rng.gen_range(-1.0..=1.0);
            *wk = u * if k < 4 { noise.flow_bound } else { noise.count_bound };
        }
    }
    let f = flows.as_array();
    let m = Measurement {
        f_all_in: f[0] + w[0],
        f_all_out: f[1] + w[1],
        f_cv_in: f[2] + w[2],
        f_cv_out: f[3] + w[3],
        x_cv: state.x_cv + w[4],
    };
    (m, w)
}

/// Piecewise-constant profile: `(start_cycle, value)` segments, sorted by
/// start. Values before the first start take the first segment's value.
#[derive(Clone, Debug, PartialEq)]
pub struct Profile {
    segments: Vec<(usize, f64)>,
}

impl Profile {
    pub fn new(mut segments: Vec<(usize, f64)>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::EmptyProfile);
        }
        segments.sort_by_key(|s| s.0);
        Ok(Self { segments })
    }

    pub fn constant(value: f64) -> Self {
        Self {
            segments: vec![(0, value)],
        }
    }

    pub fn segments(&self) -> &[(usize, f64)] {
        &self.segments
    }

    pub fn at(&self, t: usize) -> f64 {
        let idx = self.segments.partition_point(|s| s.0 <= t);
        self.segments[idx.saturating_sub(1)].1
    }

    /// `Σ value(t) · delta_t` over cycles `0..horizon`.
    pub fn integrate(&self, horizon: usize, delta_t: f64) -> f64 {
        (0..horizon).map(|t| self.at(t) * delta_t).sum()
    }
}

/// Arrival rate (veh/h) at cycle `t` from a segment table, holding the
/// last value.
pub fn demand(segments: &[(usize, f64)], t: usize) -> Result<f64> {
    Ok(Profile::new(segments.to_vec())?.at(t))
}

#[derive(Clone, Debug, PartialEq)]
pub struct OccupancyParams {
    /// Ramp capacity in vehicles.
    pub capacity: f64,
    /// Exponent of the entrance-occupancy map.
    pub exponent: f64,
    /// Mainline occupancy added per unit metered-flow ratio.
    pub coupling: f64,
    /// Flow normalizing the metered inflow ratio, veh/h.
    pub r_max: f64,
}

/// Entrance and mainline occupancy proxies, both in `[0, 1]`.
pub fn occupancy_proxy(
    state: &QueueState,
    mainline_base: f64,
    metered_flow: f64,
    p: &OccupancyParams,
) -> (f64, f64) {
    let o_a = (state.x_all / p.capacity).clamp(0.0, 1.0).powf(p.exponent);
    let o_m = (mainline_base + p.coupling * metered_flow / p.r_max).clamp(0.0, 1.0);
    (o_a, o_m)
}

/// Random streams of a plant, split so arrivals, tagging, θ and noise
/// stay decoupled under parameter changes.
const STREAM_ARRIVALS: u64 = 1;
const STREAM_TAGGING: u64 = 2;
const STREAM_THETA: u64 = 3;
const STREAM_NOISE: u64 = 4;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Seeded noise stream for `measure`.
pub fn noise_rng(seed: u64) -> ChaCha8Rng {
    stream_rng(seed, STREAM_NOISE)
}

pub struct Plant {
    capacity: usize,
    delta_t: f64,
    pen: PenetrationSpec,
    queue: VecDeque<f64>,
    x_cv: f64,
    credit: f64,
    spillback: u64,
    theta_walk: f64,
    arrival_rng: ChaCha8Rng,
    tag_rng: ChaCha8Rng,
    theta_rng: ChaCha8Rng,
}

impl Plant {
    pub fn new(capacity: usize, delta_t: f64, pen: PenetrationSpec) -> Result<Self> {
        pen.validate()?;
        if capacity == 0 {
            return Err(Error::validation("plant.capacity", "must be > 0"));
        }
        if !(delta_t > 0.0 && delta_t.is_finite()) {
            return Err(Error::validation("solver.delta_t", "must be > 0"));
        }
        let seed = pen.seed;
        Ok(Self {
            capacity,
            delta_t,
            pen,
            queue: VecDeque::with_capacity(capacity),
            x_cv: 0.0,
            credit: 0.0,
            spillback: 0,
            theta_walk: 0.0,
            arrival_rng: stream_rng(seed, STREAM_ARRIVALS),
            tag_rng: stream_rng(seed, STREAM_TAGGING),
            theta_rng: stream_rng(seed, STREAM_THETA),
        })
    }

    /// Seeds the queue with `n` vehicles (clipped to capacity), tagged as
    /// arrivals would be.
    pub fn with_initial_queue(mut self, n: usize) -> Self {
        for _ in 0..n.min(self.capacity) {
            let w = self.tag_weight();
            self.queue.push_back(w);
        }
        self.x_cv = self.queue.iter().sum();
        self
    }

    pub fn state(&self) -> QueueState {
        QueueState {
            x_all: self.queue.len() as f64,
            x_cv: self.x_cv,
        }
    }

    /// Emergent penetration fluctuation `x_cv / x_all - alpha`, 0 when empty.
    pub fn theta(&self) -> f64 {
        if self.queue.is_empty() {
            0.0
        } else {
            self.x_cv / self.queue.len() as f64 - self.pen.alpha
        }
    }

    pub fn spillback(&self) -> u64 {
        self.spillback
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Poisson arrival count for one cycle at `rate` veh/h.
    pub fn draw_arrivals(&mut self, rate: f64) -> u32 {
        let mean = rate.max(0.0) * self.delta_t;
        if mean == 0.0 {
            return 0;
        }
        Poisson::new(mean)
            .expect("mean is positive and finite")
            .sample(&mut self.arrival_rng) as u32
    }

    fn tag_weight(&mut self) -> f64 {
        match self.pen.mode {
            PenetrationMode::Bernoulli => {
                if self.tag_rng.gen_bool(self.pen.alpha) {
                    1.0
                } else {
                    0.0
                }
            }
            PenetrationMode::SyntheticTheta => self.pen.alpha + self.theta_walk,
        }
    }

    /// Advances one cycle: discharge from the head under the metered flow,
    /// then admit arrivals up to the remaining space. Rejected arrivals are
    /// counted as spillback.
    pub fn step(&mut self, arrivals: u32, metered_outflow: f64) -> (QueueState, FlowRecord) {
        if self.pen.mode == PenetrationMode::SyntheticTheta {
            self.theta_walk = synthesize_theta(&self.pen, self.theta_walk, &mut self.theta_rng)
                .expect("mode checked");
        }

        self.credit += metered_outflow.max(0.0) * self.delta_t;
        let n_out = (self.credit.floor() as usize).min(self.queue.len());
        self.credit = (self.credit - n_out as f64).min(1.0);
        let cv_out: f64 = self.queue.drain(..n_out).sum();

        let space = self.capacity - self.queue.len();
        let n_in = (arrivals as usize).min(space);
        self.spillback += (arrivals as usize - n_in) as u64;
        let mut cv_in = 0.0;
        for _ in 0..n_in {
            let w = self.tag_weight();
            cv_in += w;
            self.queue.push_back(w);
        }
        // recomputed rather than accumulated so x_cv carries no drift
        self.x_cv = self.queue.iter().sum();

        let flows = FlowRecord {
            f_all_in: n_in as f64 / self.delta_t,
            f_all_out: n_out as f64 / self.delta_t,
            f_cv_in: cv_in / self.delta_t,
            f_cv_out: cv_out / self.delta_t,
        };
        (self.state(), flows)
    }
}
