//! Log-det barrier path following for small dense LMI programs.
//!
//! Solves `min cᵀx  s.t.  G_k(x) = G_k0 + Σ x_i G_ki ≻ 0` for a handful of
//! affine symmetric blocks. Each centering step is a damped Newton method on
//! `t cᵀx - Σ log det G_k(x)`; the duality gap of a centered point is
//! `m / t` with `m = Σ dim G_k`.

use crate::matops::{Cholesky, SymMatrix};

/// Affine symmetric matrix function `base + Σ x_i coeffs[i]`.
#[derive(Clone, Debug)]
pub struct AffineBlock {
    pub base: SymMatrix,
    pub coeffs: Vec<SymMatrix>,
}

impl AffineBlock {
    pub fn eval(&self, x: &[f64]) -> SymMatrix {
        debug_assert_eq!(x.len(), self.coeffs.len());
        let mut out = self.base.clone();
        for (xi, gi) in x.iter().zip(&self.coeffs) {
            if *xi != 0.0 {
                out.axpy(*xi, gi);
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// Same block with one extra variable `s` entering as `+ s I`.
    pub fn with_identity_slack(&self) -> AffineBlock {
        let mut coeffs = self.coeffs.clone();
        coeffs.push(SymMatrix::identity(self.dim()));
        AffineBlock {
            base: self.base.clone(),
            coeffs,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BarrierProblem {
    pub cost: Vec<f64>,
    pub blocks: Vec<AffineBlock>,
}

#[derive(Clone, Copy, Debug)]
pub struct PathOptions {
    pub t_growth: f64,
    pub newton_tol: f64,
    pub max_newton: usize,
    pub max_outer: usize,
}

#[derive(Debug)]
pub enum CenterFailure {
    /// Line search could not make progress; carries the decrement reached.
    Stalled { decrement: f64 },
    IterationLimit { decrement: f64 },
}

pub(crate) struct Centered {
    pub newton_steps: usize,
}

impl BarrierProblem {
    pub fn nvars(&self) -> usize {
        self.cost.len()
    }

    /// Total barrier dimension `m`.
    pub fn barrier_degree(&self) -> f64 {
        self.blocks.iter().map(|b| b.dim()).sum::<usize>() as f64
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.cost.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    fn factors(&self, x: &[f64]) -> Option<Vec<Cholesky>> {
        self.blocks.iter().map(|b| b.eval(x).cholesky()).collect()
    }

    pub fn is_strictly_feasible(&self, x: &[f64]) -> bool {
        self.factors(x).is_some()
    }

    fn barrier_value(&self, x: &[f64], t: f64) -> Option<f64> {
        let facs = self.factors(x)?;
        let logdet: f64 = facs.iter().map(|f| f.log_det()).sum();
        let v = t * self.objective(x) - logdet;
        v.is_finite().then_some(v)
    }

    /// Gradient and Hessian of the barrier function at a strictly feasible `x`.
    fn derivatives(&self, x: &[f64], t: f64) -> Option<(Vec<f64>, Vec<f64>)> {
        let n = self.nvars();
        let mut grad: Vec<f64> = self.cost.iter().map(|c| t * c).collect();
        let mut hess = vec![0.0; n * n];
        for block in &self.blocks {
            let inv = block.eval(x).cholesky()?.inverse();
            let d = block.dim();
            // Y_i = G⁻¹ G_i, dense d x d
            let ys: Vec<Option<Vec<f64>>> = block
                .coeffs
                .iter()
                .map(|gi| {
                    if gi.as_slice().iter().all(|v| *v == 0.0) {
                        return None;
                    }
                    let mut y = vec![0.0; d * d];
                    for r in 0..d {
                        for k in 0..d {
                            let a = inv.get(r, k);
                            if a == 0.0 {
                                continue;
                            }
                            for c in 0..d {
                                y[r * d + c] += a * gi.get(k, c);
                            }
                        }
                    }
                    Some(y)
                })
                .collect();
            for i in 0..n {
                let Some(yi) = &ys[i] else { continue };
                grad[i] -= (0..d).map(|k| yi[k * d + k]).sum::<f64>();
                for j in i..n {
                    let Some(yj) = &ys[j] else { continue };
                    let mut tr = 0.0;
                    for a in 0..d {
                        for b in 0..d {
                            tr += yi[a * d + b] * yj[b * d + a];
                        }
                    }
                    hess[i * n + j] += tr;
                    if i != j {
                        hess[j * n + i] += tr;
                    }
                }
            }
        }
        Some((grad, hess))
    }

    /// Newton direction with diagonal (Jacobi) scaling of the Hessian.
    fn newton_direction(&self, grad: &[f64], hess: &[f64]) -> Option<Vec<f64>> {
        let n = grad.len();
        let scale: Vec<f64> = (0..n)
            .map(|i| {
                let h = hess[i * n + i];
                if h > 0.0 {
                    1.0 / h.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        let mut ridge = 0.0;
        for _ in 0..8 {
            let scaled = SymMatrix::from_upper_fn(n, |i, j| {
                let v = hess[i * n + j] * scale[i] * scale[j];
                if i == j {
                    v + ridge
                } else {
                    v
                }
            });
            if let Some(ch) = scaled.cholesky() {
                let mut rhs: Vec<f64> = (0..n).map(|i| -grad[i] * scale[i]).collect();
                ch.solve_in_place(&mut rhs);
                return Some(rhs.iter().zip(&scale).map(|(v, s)| v * s).collect());
            }
            ridge = if ridge == 0.0 { 1e-12 } else { ridge * 100.0 };
        }
        None
    }

    /// Centers `x` for barrier weight `t`. `stop` is checked after every
    /// accepted step and ends centering early when it returns true.
    pub(crate) fn center(
        &self,
        x: &mut Vec<f64>,
        t: f64,
        opts: &PathOptions,
        mut stop: impl FnMut(&[f64]) -> bool,
    ) -> Result<Centered, CenterFailure> {
        let mut decrement = f64::INFINITY;
        for step in 0..opts.max_newton {
            let (grad, hess) = self
                .derivatives(x, t)
                .ok_or(CenterFailure::Stalled { decrement })?;
            let dx = self
                .newton_direction(&grad, &hess)
                .ok_or(CenterFailure::Stalled { decrement })?;
            let slope: f64 = grad.iter().zip(&dx).map(|(g, d)| g * d).sum();
            decrement = -slope;
            if decrement / 2.0 <= opts.newton_tol {
                return Ok(Centered { newton_steps: step });
            }
            let f0 = self
                .barrier_value(x, t)
                .ok_or(CenterFailure::Stalled { decrement })?;
            let mut s = 1.0;
            let mut trial = x.clone();
            loop {
                for (tv, (xv, dv)) in trial.iter_mut().zip(x.iter().zip(&dx)) {
                    *tv = xv + s * dv;
                }
                if let Some(f1) = self.barrier_value(&trial, t) {
                    if f1 <= f0 + 0.25 * s * slope {
                        break;
                    }
                }
                s *= 0.5;
                if s < 1e-14 {
                    // Armijo fails only at round-off level near the center
                    if decrement < 1e-6 {
                        return Ok(Centered { newton_steps: step });
                    }
                    return Err(CenterFailure::Stalled { decrement });
                }
            }
            std::mem::swap(x, &mut trial);
            if stop(x) {
                return Ok(Centered {
                    newton_steps: step + 1,
                });
            }
        }
        Err(CenterFailure::IterationLimit { decrement })
    }
}
