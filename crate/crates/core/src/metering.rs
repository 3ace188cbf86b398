//! ALINEA integral metering with a queue override.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct MeteringParams {
    /// Integral gain, veh/h per unit occupancy.
    pub k_i: f64,
    /// Critical mainline occupancy.
    pub o_m_target: f64,
    /// Entrance occupancy that triggers the override.
    pub o_a_threshold: f64,
    pub r_min: f64,
    pub r_max: f64,
}

impl MeteringParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_min > 0.0 && self.r_min <= self.r_max && self.r_max.is_finite()) {
            return Err(Error::validation("metering.r_min", "need 0 < r_min <= r_max"));
        }
        if !(0.0..=1.0).contains(&self.o_m_target) {
            return Err(Error::validation("metering.o_m_target", "must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.o_a_threshold) {
            return Err(Error::validation("metering.o_a_threshold", "must lie in [0, 1]"));
        }
        if !self.k_i.is_finite() {
            return Err(Error::validation("metering.k_i", "must be finite"));
        }
        Ok(())
    }
}

/// Median of three values.
pub fn mid(a: f64, b: f64, c: f64) -> f64 {
    a.max(b).min(a.min(b).max(c))
}

/// `mid{R_min, r_prev + K_i (õ_M - o_M), R_max}`.
pub fn alinea_integral(r_prev: f64, o_m: f64, p: &MeteringParams) -> f64 {
    mid(p.r_min, r_prev + p.k_i * (p.o_m_target - o_m), p.r_max)
}

/// `R_max` once the entrance occupancy reaches the threshold, else `R_min`.
pub fn queue_override(o_a: f64, p: &MeteringParams) -> f64 {
    if o_a >= p.o_a_threshold {
        p.r_max
    } else {
        p.r_min
    }
}

pub fn meter(r_i: f64, r_o: f64) -> f64 {
    r_i.max(r_o)
}
