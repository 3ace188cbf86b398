//! Derivative-free random search over the synthesis variables.
//!
//! Used only as an independent near-optimality oracle for the barrier
//! solver. The search runs over `(P, L)` alone. For a fixed pair the
//! multipliers are eliminated in closed form: taking Schur complements of
//! the `-mu3 I`, `-P + I` and `-mu2 I` bands leaves the 2x2 condition
//!
//! ```text
//! N(mu3) = P - K (P - I)⁻¹ Kᵀ - (Θ²/mu3) P²  ≻  J Jᵀ / mu2
//! K = P (A - L C),  J = P (D - L E)
//! ```
//!
//! so the best `mu2` for a given `mu3` is the top generalized eigenvalue of
//! `(J Jᵀ, N)`, and `mu1` sits just above `mu3`. The remaining scalar
//! problem in `mu3` is convex and solved by golden section. The winning
//! point is re-checked against the full 13x13 matrix by Cholesky.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::lmi::{assemble_theorem_lmi, system_matrices, LmiConstants, LmiVars};
use crate::matops::{is_negative_definite, Mat, SymMatrix};

#[derive(Clone, Debug)]
pub struct SearchOptions {
    /// Number of `(P, L)` candidates evaluated.
    pub budget: usize,
    pub seed: u64,
    pub mu1_cap: f64,
    pub epsilon_margin: f64,
    /// Fraction of the budget spent on broad sampling before local search.
    pub explore_fraction: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            budget: 200_000,
            seed: 0x0ac1e,
            mu1_cap: 1.0,
            epsilon_margin: 1e-7,
            explore_fraction: 0.1,
        }
    }
}

// Search coordinates:
//   0: ln λ1, 1: ln λ2, 2: φ      P = I + Q(φ) diag(λ1, λ2) Q(φ)ᵀ
//   3: l1, 4: l2                  gain L
const DIM: usize = 5;

type M2 = [[f64; 2]; 2];

fn decode_p(z: &[f64; DIM]) -> M2 {
    let (l1, l2) = (z[0].exp(), z[1].exp());
    let (s, c) = z[2].sin_cos();
    let off = (l1 - l2) * c * s;
    [
        [1.0 + l1 * c * c + l2 * s * s, off],
        [off, 1.0 + l1 * s * s + l2 * c * c],
    ]
}

fn to_m2(m: &Mat) -> M2 {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

fn mul(a: &M2, b: &M2) -> M2 {
    let mut o = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            o[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    o
}

fn transpose(a: &M2) -> M2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

fn det(a: &M2) -> f64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

fn inv(a: &M2) -> Option<M2> {
    let d = det(a);
    (d.abs() > 0.0 && d.is_finite()).then(|| {
        [
            [a[1][1] / d, -a[0][1] / d],
            [-a[1][0] / d, a[0][0] / d],
        ]
    })
}

fn is_pd(a: &M2) -> bool {
    a[0][0] > 0.0 && det(a) > 0.0
}

/// Largest eigenvalue of `X⁻¹ S`, real for `X ≻ 0` and `S` symmetric.
fn top_generalized_eig(s: &M2, x: &M2) -> Option<f64> {
    let m = mul(&inv(x)?, s);
    let tr = m[0][0] + m[1][1];
    let disc = (tr * tr / 4.0 - det(&m)).max(0.0);
    Some(tr / 2.0 + disc.sqrt())
}

/// Pieces of the reduced condition that do not depend on the multipliers.
struct Reduced {
    n0: M2,
    p2: M2,
    jjt: M2,
}

struct Problem<'a> {
    consts: &'a LmiConstants,
    beta: f64,
    cap: f64,
}

impl Problem<'_> {
    fn reduce(&self, p: &M2, gain: [f64; 2]) -> Option<Reduced> {
        let c = &self.consts;
        let lc = Mat::from_fn(2, 2, |i, j| gain[i] * c.c[(0, j)]);
        let le = Mat::from_fn(2, 5, |i, j| gain[i] * c.e[(0, j)]);
        let a_cl = to_m2(&(&c.a - &lc));
        let d_cl = &c.d - &le;
        let k = mul(p, &a_cl);
        let pmi = [[p[0][0] - 1.0, p[0][1]], [p[1][0], p[1][1] - 1.0]];
        let kpk = mul(&mul(&k, &inv(&pmi)?), &transpose(&k));
        let n0 = [
            [p[0][0] - kpk[0][0], p[0][1] - kpk[0][1]],
            [p[1][0] - kpk[1][0], p[1][1] - kpk[1][1]],
        ];
        if !is_pd(&n0) {
            return None;
        }
        let ddt = to_m2(&(&d_cl * &d_cl.transpose()));
        let jjt = mul(&mul(p, &ddt), p);
        Some(Reduced {
            n0,
            p2: mul(p, p),
            jjt,
        })
    }

    /// Least `mu2` admissible for a given `mu3`.
    fn mu2_for(&self, red: &Reduced, mu3: f64) -> Option<f64> {
        let w = self.consts.theta_bound.powi(2) / mu3;
        let mut n = red.n0;
        for i in 0..2 {
            for j in 0..2 {
                n[i][j] -= w * red.p2[i][j];
            }
        }
        if !is_pd(&n) {
            return None;
        }
        top_generalized_eig(&red.jjt, &n)
    }

    /// Best `(mu3, mu2, value)` for fixed `(P, L)`, with `mu1 → mu3`.
    fn inner(&self, p: &M2, gain: [f64; 2]) -> Option<(f64, f64, f64)> {
        let red = self.reduce(p, gain)?;
        let theta2 = self.consts.theta_bound.powi(2);
        let mu3_min = if theta2 > 0.0 {
            theta2 * top_generalized_eig(&red.p2, &red.n0)?
        } else {
            0.0
        };
        let lo = (mu3_min * (1.0 + 1e-9)).max(1e-6).ln();
        let hi = (self.cap - 1e-4).ln();
        if !(lo < hi) {
            return None;
        }
        let g = |u: f64| -> f64 {
            let mu3 = u.exp();
            match self.mu2_for(&red, mu3) {
                Some(mu2) => mu3 + self.beta * mu2,
                None => f64::INFINITY,
            }
        };
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (lo, hi);
        let mut x1 = b - phi * (b - a);
        let mut x2 = a + phi * (b - a);
        let (mut g1, mut g2) = (g(x1), g(x2));
        while b - a > 1e-9 {
            if g1 <= g2 {
                b = x2;
                x2 = x1;
                g2 = g1;
                x1 = b - phi * (b - a);
                g1 = g(x1);
            } else {
                a = x1;
                x1 = x2;
                g1 = g2;
                x2 = a + phi * (b - a);
                g2 = g(x2);
            }
        }
        let u = 0.5 * (a + b);
        let mu3 = u.exp();
        let mu2 = self.mu2_for(&red, mu3)?;
        let v = mu3 + self.beta * mu2;
        v.is_finite().then_some((mu3, mu2, v))
    }

    /// Full-matrix check of a reduced optimum, nudging the multipliers
    /// off the boundary until the margin holds.
    fn certify(&self, p: &M2, gain: [f64; 2], mu3: f64, mu2: f64, margin: f64) -> Option<f64> {
        let mut ps = SymMatrix::zeros(2);
        ps.set(0, 0, p[0][0]);
        ps.set(0, 1, p[0][1]);
        ps.set(1, 1, p[1][1]);
        for bump in [1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2] {
            let m3 = mu3 * (1.0 + bump);
            let m1 = m3 * (1.0 + bump) + 2.0 * margin;
            if m1 > self.cap {
                continue;
            }
            let m2 = mu2 * (1.0 + bump) + 2.0 * margin;
            let vars = LmiVars::from_gain(ps.clone(), gain, m1, m2, m3);
            if is_negative_definite(&assemble_theorem_lmi(self.consts, &vars), margin) {
                return Some(m1 + self.beta * m2);
            }
        }
        None
    }
}

fn broad_sample(rng: &mut ChaCha8Rng, alpha: f64) -> [f64; DIM] {
    let log_uniform = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| rng.gen_range(lo.ln()..hi.ln());
    [
        log_uniform(rng, 1e-3, 1e5),
        log_uniform(rng, 1e-3, 1e5),
        rng.gen_range(0.0..std::f64::consts::PI),
        // around the deadbeat gain (1/alpha, 1)
        (1.0 / alpha) * rng.gen_range(0.3..1.7),
        rng.gen_range(0.0..1.7),
    ]
}

/// Best `mu1 + beta mu2` over random certified-feasible candidates, or
/// `+inf` when none is found.
pub fn random_search_oracle(
    alpha: f64,
    theta_bound: f64,
    delta_t: f64,
    beta: f64,
    budget: usize,
) -> f64 {
    random_search_oracle_with(
        alpha,
        theta_bound,
        delta_t,
        beta,
        &SearchOptions {
            budget,
            ..SearchOptions::default()
        },
    )
}

pub fn random_search_oracle_with(
    alpha: f64,
    theta_bound: f64,
    delta_t: f64,
    beta: f64,
    opts: &SearchOptions,
) -> f64 {
    let Ok(consts) = system_matrices(alpha, delta_t).and_then(|c| c.with_theta_bound(theta_bound))
    else {
        return f64::INFINITY;
    };
    let prob = Problem {
        consts: &consts,
        beta,
        cap: opts.mu1_cap,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut used = 0usize;
    let mut eval = |z: &[f64; DIM]| -> f64 {
        used += 1;
        if z.iter().any(|v| !v.is_finite()) {
            return f64::INFINITY;
        }
        prob.inner(&decode_p(z), [z[3], z[4]])
            .map_or(f64::INFINITY, |r| r.2)
    };

    // broad exploration, continued past its share until something feasible
    // shows up; keeps a few distinct feasible centers
    let explore = ((opts.budget as f64) * opts.explore_fraction) as usize;
    let mut centers: Vec<(f64, [f64; DIM])> = Vec::new();
    let mut n = 0;
    while (n < explore || centers.is_empty()) && n < opts.budget {
        let z = broad_sample(&mut rng, alpha);
        let f = eval(&z);
        n += 1;
        if f.is_finite() {
            centers.push((f, z));
            centers.sort_by(|a, b| a.0.total_cmp(&b.0));
            centers.truncate(4);
        }
    }
    if centers.is_empty() {
        return f64::INFINITY;
    }

    // (1+1)-CMA-ES: success-rule step size plus a rank-one covariance
    // update along the evolution path; restarted from the stored centers
    // and then from the incumbent whenever the step size collapses
    let nd = DIM as f64;
    let damp = 1.0 + nd / 2.0;
    let (p_target, c_p, c_c, c_cov, p_thresh) =
        (2.0 / 11.0, 1.0 / 12.0, 2.0 / (nd + 2.0), 2.0 / (nd * nd + 6.0), 0.44);
    let base_sigma = [0.5, 0.5, 0.2, 0.2 / alpha, 0.2];
    let mut best = centers[0];
    let mut center_idx = 0;
    while n < opts.budget {
        let (mut fx, mut x) = centers.get(center_idx).copied().unwrap_or(best);
        center_idx += 1;
        let mut sigma = 1.0;
        let mut p_succ = p_target;
        let mut path = [0.0; DIM];
        let mut cov = SymMatrix::from_diag(&base_sigma.map(|s| s * s));
        let mut factor = cov.cholesky().expect("diagonal covariance");
        while sigma > 1e-9 && n < opts.budget {
            let g: [f64; DIM] = std::array::from_fn(|_| rng.sample(StandardNormal));
            let step: [f64; DIM] =
                std::array::from_fn(|i| (0..=i).map(|k| factor.lower(i, k) * g[k]).sum());
            let y: [f64; DIM] = std::array::from_fn(|i| x[i] + sigma * step[i]);
            let fy = eval(&y);
            n += 1;
            let success = fy <= fx;
            p_succ = (1.0 - c_p) * p_succ + if success { c_p } else { 0.0 };
            sigma *= ((p_succ - p_target) / (damp * (1.0 - p_target))).exp();
            if !success {
                continue;
            }
            x = y;
            fx = fy;
            if p_succ < p_thresh {
                let k = (c_c * (2.0 - c_c)).sqrt();
                for i in 0..DIM {
                    path[i] = (1.0 - c_c) * path[i] + k * step[i];
                }
                cov = SymMatrix::from_upper_fn(DIM, |i, j| {
                    (1.0 - c_cov) * cov.get(i, j) + c_cov * path[i] * path[j]
                });
            } else {
                for v in path.iter_mut() {
                    *v *= 1.0 - c_c;
                }
                let keep = 1.0 - c_cov + c_cov * c_c * (2.0 - c_c);
                cov = SymMatrix::from_upper_fn(DIM, |i, j| {
                    keep * cov.get(i, j) + c_cov * path[i] * path[j]
                });
            }
            if let Some(f) = cov.cholesky() {
                factor = f;
            }
        }
        if fx < best.0 {
            best = (fx, x);
        }
    }

    let z = best.1;
    let p = decode_p(&z);
    let gain = [z[3], z[4]];
    match prob.inner(&p, gain) {
        Some((mu3, mu2, _)) => prob
            .certify(&p, gain, mu3, mu2, opts.epsilon_margin)
            .unwrap_or(f64::INFINITY),
        None => f64::INFINITY,
    }
}
