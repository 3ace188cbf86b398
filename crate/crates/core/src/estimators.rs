//! Queue estimators: the robust filter, the open-loop ratio estimator and
//! the occupancy-corrected flow integrator used as a Kalman-style baseline.

use crate::plant::Measurement;
use crate::sdp::FilterDesign;

/// Robust filter state `(x̂_all, x̂_cv)` in vehicles.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RobustFilterState {
    pub xhat: [f64; 2],
}

impl RobustFilterState {
    pub fn new(x_all: f64, x_cv: f64) -> Self {
        Self {
            xhat: [x_all, x_cv],
        }
    }

    /// Copy clipped to `[0, q]²`.
    pub fn clamped(&self, q: f64) -> Self {
        Self {
            xhat: self.xhat.map(|v| v.clamp(0.0, q)),
        }
    }
}

/// One filter update `x̂' = A x̂ + B f̃ + L (y - x̂_cv)`.
pub fn robust_step(
    design: &FilterDesign,
    state: &RobustFilterState,
    f_tilde: [f64; 4],
    y: f64,
) -> RobustFilterState {
    let [x_all, x_cv] = state.xhat;
    let dt = design.delta_t;
    let innovation = y - x_cv;
    RobustFilterState {
        xhat: [
            x_all + dt * (f_tilde[0] - f_tilde[1]) + design.gain[0] * innovation,
            design.alpha * x_all + dt * (f_tilde[2] - f_tilde[3]) + design.gain[1] * innovation,
        ],
    }
}

/// Error recursion `e' = (A - LC) e + ΔA(θ) x + (D - LE) w`.
pub fn error_step(design: &FilterDesign, theta: f64, e: [f64; 2], x: [f64; 2], w: [f64; 5]) -> [f64; 2] {
    let [l1, l2] = design.gain;
    let dt = design.delta_t;
    [
        e[0] - l1 * e[1] - dt * (w[0] - w[1]) - l1 * w[4],
        design.alpha * e[0] - l2 * e[1] + theta * x[0] - dt * (w[2] - w[3]) - l2 * w[4],
    ]
}

/// Guard on the ratio sum of the open-loop estimator.
pub const OPEN_LOOP_RATIO_EPS: f64 = 1e-6;

/// `x̂_all = 2 x̃_cv / (f̃_cv_in / f̃_all_in + f̃_cv_out / f̃_all_out)`, holding
/// `prev_estimate` whenever a denominator flow is below `eps_flow` or the
/// ratio sum is not positive.
pub fn open_loop_estimate(meas: &Measurement, prev_estimate: f64, eps_flow: f64) -> f64 {
    if meas.f_all_in < eps_flow || meas.f_all_out < eps_flow {
        return prev_estimate;
    }
    let ratios = meas.f_cv_in / meas.f_all_in + meas.f_cv_out / meas.f_all_out;
    if !(ratios >= OPEN_LOOP_RATIO_EPS) {
        return prev_estimate;
    }
    2.0 * meas.x_cv / ratios
}

#[derive(Clone, Debug, PartialEq)]
pub struct KalmanBaselineParams {
    pub k_f: f64,
    /// Average vehicle length, m.
    pub l_veh: f64,
    /// Sensor length, m.
    pub l_d: f64,
    /// Back-of-queue capacity, veh.
    pub q_bb: f64,
    /// Clamp upper bound, veh.
    pub q: f64,
}

/// `x̂ = prev + δt (f̃_all_in - f̃_all_out) + K_f (Q_bb L̄/(L̄ + L_d) o_A - prev)`,
/// clamped to `[0, Q]`.
pub fn kalman_baseline_step(
    prev: f64,
    meas: &Measurement,
    o_a_prev: f64,
    params: &KalmanBaselineParams,
    delta_t: f64,
) -> f64 {
    let occupancy_queue = params.q_bb * params.l_veh / (params.l_veh + params.l_d) * o_a_prev;
    let x = prev
        + delta_t * (meas.f_all_in - meas.f_all_out)
        + params.k_f * (occupancy_queue - prev);
    x.clamp(0.0, params.q)
}
