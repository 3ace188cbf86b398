//! Robust filter synthesis: minimize `mu1 + beta * mu2` subject to the
//! synthesis LMI, by a two-phase log-det barrier method over the eight
//! scalar unknowns `(P11, P12, P22, R1, R2, mu1, mu2, mu3)`.
//!
//! Every returned [`FilterDesign`] is re-certified with a Cholesky test
//! that does not depend on solver internals.

mod barrier;
mod search;

pub use barrier::{AffineBlock, BarrierProblem};
pub use search::{random_search_oracle, random_search_oracle_with, SearchOptions};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lmi::{assemble_theorem_lmi, system_matrices, LmiConstants, LmiVars};
use crate::matops::{is_negative_definite, SymMatrix};

use barrier::{CenterFailure, PathOptions};

/// Number of scalar decision variables.
pub const NVARS: usize = 8;

/// Synthesized gain with its LMI certificate and the data it certifies.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterDesign {
    pub gain: [f64; 2],
    pub p: SymMatrix,
    pub r: [f64; 2],
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub alpha: f64,
    pub theta_bound: f64,
    pub delta_t: f64,
    pub beta: f64,
    pub objective: f64,
    pub newton_steps: usize,
}

impl FilterDesign {
    /// Builds a design from an explicit certificate, recovering `L = P⁻¹R`.
    pub fn from_vars(
        vars: &LmiVars,
        alpha: f64,
        theta_bound: f64,
        delta_t: f64,
        beta: f64,
    ) -> Result<Self> {
        let gain = vars.gain()?;
        Ok(Self {
            gain,
            p: vars.p.clone(),
            r: vars.r,
            mu1: vars.mu1,
            mu2: vars.mu2,
            mu3: vars.mu3,
            alpha,
            theta_bound,
            delta_t,
            beta,
            objective: vars.mu1 + beta * vars.mu2,
            newton_steps: 0,
        })
    }

    pub fn sqrt_mu1(&self) -> f64 {
        self.mu1.sqrt()
    }

    pub fn vars(&self) -> LmiVars {
        LmiVars {
            p: self.p.clone(),
            r: self.r,
            mu1: self.mu1,
            mu2: self.mu2,
            mu3: self.mu3,
        }
    }

    pub fn constants(&self) -> Result<LmiConstants> {
        system_matrices(self.alpha, self.delta_t)?.with_theta_bound(self.theta_bound)
    }

    /// Independent post-hoc check of the design invariants.
    pub fn certify(&self, margin: f64, mu1_cap: f64) -> Result<()> {
        let consts = self.constants()?;
        let lmi = assemble_theorem_lmi(&consts, &self.vars());
        if !is_negative_definite(&lmi, margin) {
            return Err(Error::Certification(format!(
                "synthesis LMI is not negative definite with margin {margin:e}"
            )));
        }
        if !is_negative_definite(&(&SymMatrix::identity(2) - &self.p), 0.0) {
            return Err(Error::Certification("P - I is not positive definite".into()));
        }
        if !(self.mu3 > 0.0 && self.mu3 < self.mu1 && self.mu2 > 0.0) {
            return Err(Error::Certification(format!(
                "multiplier ordering violated (mu1={}, mu2={}, mu3={})",
                self.mu1, self.mu2, self.mu3
            )));
        }
        if self.mu1 > mu1_cap {
            return Err(Error::Certification(format!(
                "mu1={} exceeds cap {mu1_cap}",
                self.mu1
            )));
        }
        let recovered = self.vars().gain()?;
        let scale = 1.0 + self.gain[0].abs().max(self.gain[1].abs());
        if (recovered[0] - self.gain[0]).abs() > 1e-9 * scale
            || (recovered[1] - self.gain[1]).abs() > 1e-9 * scale
        {
            return Err(Error::Certification("gain differs from P⁻¹R".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// Certified negative-definiteness margin of the synthesis LMI.
    pub epsilon_margin: f64,
    /// Relative duality-gap tolerance on the objective.
    pub objective_tol: f64,
    /// Barrier weight multiplier between centering steps.
    pub t_growth: f64,
    pub newton_tol: f64,
    pub max_newton: usize,
    pub max_outer: usize,
    /// Upper bound imposed on `mu1`.
    pub mu1_cap: f64,
    /// Seed for the single perturbed restart after a stall.
    pub restart_seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            epsilon_margin: 1e-7,
            objective_tol: 1e-6,
            t_growth: 20.0,
            newton_tol: 1e-9,
            max_newton: 200,
            max_outer: 100,
            mu1_cap: 1.0,
            restart_seed: 0x5eed,
        }
    }
}

impl SolveOptions {
    fn validate(&self) -> Result<()> {
        let positive = [
            ("epsilon_margin", self.epsilon_margin),
            ("objective_tol", self.objective_tol),
            ("newton_tol", self.newton_tol),
            ("mu1_cap", self.mu1_cap),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::validation(name, "must be strictly positive"));
            }
        }
        if !(self.t_growth > 1.0) {
            return Err(Error::validation("t_growth", "must exceed 1"));
        }
        if self.max_newton == 0 || self.max_outer == 0 {
            return Err(Error::validation("max iterations", "must be positive"));
        }
        Ok(())
    }

    fn path(&self) -> PathOptions {
        PathOptions {
            t_growth: self.t_growth,
            newton_tol: self.newton_tol,
            max_newton: self.max_newton,
            max_outer: self.max_outer,
        }
    }
}

pub(crate) fn vars_from_x(x: &[f64]) -> LmiVars {
    let mut p = SymMatrix::zeros(2);
    p.set(0, 0, x[0]);
    p.set(0, 1, x[1]);
    p.set(1, 1, x[2]);
    LmiVars {
        p,
        r: [x[3], x[4]],
        mu1: x[5],
        mu2: x[6],
        mu3: x[7],
    }
}

fn x_from_vars(v: &LmiVars) -> Vec<f64> {
    vec![
        v.p.get(0, 0),
        v.p.get(0, 1),
        v.p.get(1, 1),
        v.r[0],
        v.r[1],
        v.mu1,
        v.mu2,
        v.mu3,
    ]
}

/// Builds the barrier program: synthesis LMI shifted by `lmi_margin`,
/// `P ≻ margin I`, and `mu1 < mu1_cap`.
pub(crate) fn build_program(
    consts: &LmiConstants,
    beta: f64,
    lmi_margin: f64,
    mu1_cap: f64,
) -> BarrierProblem {
    let zero = vec![0.0; NVARS];
    let m0 = assemble_theorem_lmi(consts, &vars_from_x(&zero));
    let lmi_coeffs: Vec<SymMatrix> = (0..NVARS)
        .map(|i| {
            let mut unit = zero.clone();
            unit[i] = 1.0;
            let mi = assemble_theorem_lmi(consts, &vars_from_x(&unit));
            // G_i = -(M(e_i) - M(0))
            &m0 - &mi
        })
        .collect();
    let lmi = AffineBlock {
        base: (-&m0).shifted(-lmi_margin),
        coeffs: lmi_coeffs,
    };

    let mut p_coeffs = vec![SymMatrix::zeros(2); NVARS];
    p_coeffs[0].set(0, 0, 1.0);
    p_coeffs[1].set(0, 1, 1.0);
    p_coeffs[2].set(1, 1, 1.0);
    let p_block = AffineBlock {
        base: SymMatrix::identity(2).scale(-lmi_margin),
        coeffs: p_coeffs,
    };

    let mut cap_coeffs = vec![SymMatrix::zeros(1); NVARS];
    cap_coeffs[5].set(0, 0, -1.0);
    let cap_block = AffineBlock {
        base: SymMatrix::from_diag(&[mu1_cap]),
        coeffs: cap_coeffs,
    };

    let mut cost = vec![0.0; NVARS];
    cost[5] = 1.0;
    cost[6] = beta;
    BarrierProblem {
        cost,
        blocks: vec![lmi, p_block, cap_block],
    }
}

/// Starting point: `P = 10 I`, `L0 = (0, alpha)`, `mu3 = 0.5`,
/// `mu1 = 2 mu3`, `mu2 = 1e6`.
fn initial_point(alpha: f64) -> Vec<f64> {
    let p = SymMatrix::identity(2).scale(10.0);
    let mu3 = 0.5;
    x_from_vars(&LmiVars::from_gain(p, [0.0, alpha], 2.0 * mu3, 1e6, mu3))
}

/// Phase 1: minimize `s` subject to `G_k(x) + s I ≻ 0`, stopping as soon as
/// `s < 0`.
fn phase_one(prob: &BarrierProblem, x0: &[f64], opts: &SolveOptions) -> Result<Vec<f64>> {
    if prob.is_strictly_feasible(x0) {
        return Ok(x0.to_vec());
    }
    let aug = BarrierProblem {
        cost: {
            let mut c = vec![0.0; prob.nvars()];
            c.push(1.0);
            c
        },
        blocks: prob.blocks.iter().map(|b| b.with_identity_slack()).collect(),
    };
    let mut s0 = 1.0;
    let mut x: Vec<f64> = x0.to_vec();
    x.push(s0);
    while !aug.is_strictly_feasible(&x) {
        s0 *= 2.0;
        x[prob.nvars()] = s0;
        if s0 > 1e15 {
            return Err(Error::NonConvergence {
                reason: "could not bracket phase-1 slack".into(),
                best: None,
            });
        }
    }
    let m = aug.barrier_degree();
    let path = opts.path();
    let ns = prob.nvars();
    let mut t = m / s0.max(1.0);
    for _ in 0..path.max_outer {
        let res = aug.center(&mut x, t, &path, |z| z[ns] < 0.0);
        if x[ns] < 0.0 {
            x.truncate(ns);
            return Ok(x);
        }
        match res {
            Ok(_) | Err(CenterFailure::IterationLimit { .. }) => {}
            Err(CenterFailure::Stalled { .. }) => {}
        }
        let lower = x[ns] - m / t;
        if lower > 0.0 {
            return Err(Error::Infeasible { lower_bound: lower });
        }
        t *= path.t_growth;
    }
    Err(Error::Infeasible { lower_bound: x[ns] })
}

fn perturb(prob: &BarrierProblem, x: &[f64], seed: u64) -> Option<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scale = 1e-3;
    for _ in 0..30 {
        let y: Vec<f64> = x
            .iter()
            .map(|v| v * (1.0 + scale * rng.gen_range(-1.0..1.0)))
            .collect();
        if prob.is_strictly_feasible(&y) {
            return Some(y);
        }
        scale *= 0.5;
    }
    None
}

/// Solves the robust-filter synthesis program.
pub fn solve_p1(
    alpha: f64,
    theta_bound: f64,
    delta_t: f64,
    beta: f64,
    opts: &SolveOptions,
) -> Result<FilterDesign> {
    opts.validate()?;
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Domain(format!("weight beta must be positive, got {beta}")));
    }
    let consts = system_matrices(alpha, delta_t)?.with_theta_bound(theta_bound)?;
    // the barrier keeps twice the certified margin so the final Cholesky
    // check is not decided by round-off
    let prob = build_program(&consts, beta, 2.0 * opts.epsilon_margin, opts.mu1_cap);
    let mut x = phase_one(&prob, &initial_point(alpha), opts)?;

    let make_design = |x: &[f64], steps: usize| -> Result<FilterDesign> {
        let vars = vars_from_x(x);
        let mut d = FilterDesign::from_vars(&vars, alpha, theta_bound, delta_t, beta)?;
        d.newton_steps = steps;
        Ok(d)
    };

    let m = prob.barrier_degree();
    let path = opts.path();
    let mut t = m / prob.objective(&x).abs().max(1e-3);
    let mut total_steps = 0usize;
    let mut restarted = false;
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut converged = false;

    for _ in 0..path.max_outer {
        match prob.center(&mut x, t, &path, |_| false) {
            Ok(c) => total_steps += c.newton_steps,
            Err(CenterFailure::Stalled { decrement })
            | Err(CenterFailure::IterationLimit { decrement }) => {
                if decrement < 1e-3 {
                    // close enough to the central path for the gap bound
                } else if !restarted {
                    restarted = true;
                    if let Some(y) = perturb(&prob, &x, opts.restart_seed) {
                        x = y;
                    }
                    continue;
                } else {
                    let best_design = best
                        .as_ref()
                        .and_then(|(_, bx)| make_design(bx, total_steps).ok())
                        .map(Box::new);
                    return Err(Error::NonConvergence {
                        reason: format!("Newton decrement stalled at {decrement:.3e}"),
                        best: best_design,
                    });
                }
            }
        }
        let f = prob.objective(&x);
        if best.as_ref().map_or(true, |(bf, _)| f < *bf) {
            best = Some((f, x.clone()));
        }
        if m / t <= opts.objective_tol * f.abs().max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
        t *= path.t_growth;
    }
    if !converged {
        let best_design = best
            .as_ref()
            .and_then(|(_, bx)| make_design(bx, total_steps).ok())
            .map(Box::new);
        return Err(Error::NonConvergence {
            reason: "outer iteration budget exhausted".into(),
            best: best_design,
        });
    }
    let design = make_design(&x, total_steps)?;
    design.certify(opts.epsilon_margin, opts.mu1_cap)?;
    Ok(design)
}
