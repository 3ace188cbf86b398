//! Queue-model system matrices and the robust-filter LMI.
//!
//! The state is `x = (x_all, x_cv)`. With market penetration `alpha` and
//! cycle length `delta_t` (hours):
//!
//! ```text
//! A = [1 0; alpha 0]      B = -D = [dt -dt 0 0 0; 0 0 dt -dt 0]
//! C = [0 1]               E = [0 0 0 0 1]
//! ```
//!
//! The synthesis LMI has five bands of sizes (2, 2, 2, 2, 5):
//!
//! ```text
//! [ -mu3 I   Θ P    0        0             0       ]
//! [   *      -P     PA - RC  0             PD - RE ]
//! [   *      *      -P + I   0             0       ]  ≺ 0
//! [   *      *      *        (mu3 - mu1) I 0       ]
//! [   *      *      *        *             -mu2 I  ]
//! ```

use crate::error::{Error, Result};
use crate::matops::{assemble_blocks, inverse_2x2, BlockLayout, Mat, SymMatrix};

/// Band sizes of the synthesis LMI.
pub const THEOREM_BANDS: [usize; 5] = [2, 2, 2, 2, 5];
/// Dimension of the synthesis LMI.
pub const THEOREM_DIM: usize = 13;

/// Fixed system data of the queue model.
#[derive(Clone, Debug)]
pub struct LmiConstants {
    pub alpha: f64,
    pub theta_bound: f64,
    pub delta_t: f64,
    pub a: Mat,
    pub b: Mat,
    pub c: Mat,
    pub d: Mat,
    pub e: Mat,
}

/// Decision variables of the synthesis LMI.
#[derive(Clone, Debug, PartialEq)]
pub struct LmiVars {
    pub p: SymMatrix,
    pub r: [f64; 2],
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
}

impl LmiVars {
    /// `R = P L` for a given gain.
    pub fn from_gain(p: SymMatrix, gain: [f64; 2], mu1: f64, mu2: f64, mu3: f64) -> Self {
        let r = [
            p.get(0, 0) * gain[0] + p.get(0, 1) * gain[1],
            p.get(1, 0) * gain[0] + p.get(1, 1) * gain[1],
        ];
        Self {
            p,
            r,
            mu1,
            mu2,
            mu3,
        }
    }

    /// Gain `L = P⁻¹ R`.
    pub fn gain(&self) -> Result<[f64; 2]> {
        let inv = inverse_2x2(&self.p).ok_or(Error::SingularP)?;
        Ok([
            inv.get(0, 0) * self.r[0] + inv.get(0, 1) * self.r[1],
            inv.get(1, 0) * self.r[0] + inv.get(1, 1) * self.r[1],
        ])
    }

    fn r_col(&self) -> Mat {
        Mat::from_rows(&[[self.r[0]], [self.r[1]]])
    }
}

/// Builds `A, B, C, D, E` for penetration `alpha` and cycle length `delta_t`.
pub fn system_matrices(alpha: f64, delta_t: f64) -> Result<LmiConstants> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain(format!(
            "market penetration rate must lie in (0, 1], got {alpha}"
        )));
    }
    if !(delta_t > 0.0 && delta_t.is_finite()) {
        return Err(Error::Domain(format!(
            "cycle length must be positive, got {delta_t}"
        )));
    }
    let dt = delta_t;
    let a = Mat::from_rows(&[[1.0, 0.0], [alpha, 0.0]]);
    let b = Mat::from_rows(&[[dt, -dt, 0.0, 0.0, 0.0], [0.0, 0.0, dt, -dt, 0.0]]);
    let d = -&b;
    let c = Mat::from_rows(&[[0.0, 1.0]]);
    let e = Mat::from_rows(&[[0.0, 0.0, 0.0, 0.0, 1.0]]);
    Ok(LmiConstants {
        alpha,
        theta_bound: 0.0,
        delta_t,
        a,
        b,
        c,
        d,
        e,
    })
}

impl LmiConstants {
    pub fn with_theta_bound(mut self, theta_bound: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&theta_bound) {
            return Err(Error::Domain(format!(
                "uncertainty bound must lie in [0, 1], got {theta_bound}"
            )));
        }
        self.theta_bound = theta_bound;
        Ok(self)
    }
}

/// `ΔA(θ) = [0 0; θ 0]`.
pub fn delta_a(theta: f64) -> Mat {
    Mat::from_rows(&[[0.0, 0.0], [theta, 0.0]])
}

/// Assembles the 13x13 synthesis LMI at a candidate point.
pub fn assemble_theorem_lmi(consts: &LmiConstants, vars: &LmiVars) -> SymMatrix {
    let i2 = Mat::identity(2);
    let p = vars.p.to_mat();
    let r = vars.r_col();
    let pa_rc = &(&p * &consts.a) - &(&r * &consts.c);
    let pd_re = &(&p * &consts.d) - &(&r * &consts.e);
    let layout = BlockLayout::new(&THEOREM_BANDS)
        .with(0, 0, i2.scale(-vars.mu3))
        .with(0, 1, p.scale(consts.theta_bound))
        .with(1, 1, -&p)
        .with(1, 2, pa_rc)
        .with(1, 4, pd_re)
        .with(2, 2, &i2 - &p)
        .with(3, 3, i2.scale(vars.mu3 - vars.mu1))
        .with(4, 4, Mat::identity(5).scale(-vars.mu2));
    assemble_blocks(&layout).expect("theorem layout is statically consistent")
}

/// Matrices of the Lyapunov argument at a fixed realization `theta`.
#[derive(Clone, Debug)]
pub struct Certificate {
    /// `W = [A - LC, ΔA(θ), D - LE]`, 2x9.
    pub w: Mat,
    /// `U = diag(-P + I, -mu1 I, -mu2 I)`, 9x9.
    pub u: SymMatrix,
    /// `[-P, PW; WᵀP, U]`, 11x11.
    pub coupled: SymMatrix,
}

impl Certificate {
    /// `WᵀPW + U`, the quadratic-form matrix of the dissipation inequality.
    pub fn dissipation(&self, p: &SymMatrix) -> SymMatrix {
        let wt = self.w.transpose();
        let wpw = &(&wt * &p.to_mat()) * &self.w;
        &wpw.to_sym_upper() + &self.u
    }
}

pub fn certificate_matrices(
    consts: &LmiConstants,
    vars: &LmiVars,
    theta: f64,
) -> Result<Certificate> {
    let gain = vars.gain()?;
    let l = Mat::from_rows(&[[gain[0]], [gain[1]]]);
    let a_lc = &consts.a - &(&l * &consts.c);
    let d_le = &consts.d - &(&l * &consts.e);
    let w = a_lc.hcat(&delta_a(theta)).hcat(&d_le);

    let i2 = Mat::identity(2);
    let p = vars.p.to_mat();
    let u_layout = BlockLayout::new(&[2, 2, 5])
        .with(0, 0, &i2 - &p)
        .with(1, 1, i2.scale(-vars.mu1))
        .with(2, 2, Mat::identity(5).scale(-vars.mu2));
    let u = assemble_blocks(&u_layout)?;

    let pw = &p * &w;
    let coupled = assemble_blocks(
        &BlockLayout::new(&[2, 9])
            .with(0, 0, -&p)
            .with(0, 1, pw)
            .with(1, 1, u.to_mat()),
    )?;
    Ok(Certificate { w, u, coupled })
}

/// Slack of the Young-inequality bound used to absorb the uncertainty:
///
/// `mu3⁻¹ P̃P̃ᵀ + mu3 ĨᵀĨ - (P̃ F Ĩ + Ĩᵀ Fᵀ P̃ᵀ)` with `F = ΔA(θ)/Θ`,
/// embedded in the 11-dimensional band structure (2, 2, 2, 5).
///
/// Returns `None` when `Θ = 0`, where the normalization is undefined.
pub fn young_slack(consts: &LmiConstants, vars: &LmiVars, theta: f64) -> Option<SymMatrix> {
    let big_theta = consts.theta_bound;
    if big_theta == 0.0 {
        return None;
    }
    let f = delta_a(theta / big_theta);
    let p = vars.p.to_mat();
    // P̃ lives in band 0, Ĩ selects band 2 of the (2, 2, 2, 5) layout.
    let theta_p = p.scale(big_theta);
    let ptp = &theta_p * &theta_p.transpose();
    let cross = &theta_p * &f;
    let layout = BlockLayout::new(&[2, 2, 2, 5])
        .with(0, 0, ptp.scale(1.0 / vars.mu3))
        .with(0, 2, cross.scale(-1.0))
        .with(2, 2, Mat::identity(2).scale(vars.mu3));
    Some(assemble_blocks(&layout).expect("static layout"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matops::{eigenvalue_oracle, is_negative_definite};

    fn block(m: &SymMatrix, r0: usize, c0: usize, rows: usize, cols: usize) -> Mat {
        Mat::from_fn(rows, cols, |i, j| m.get(r0 + i, c0 + j))
    }

    #[test]
    fn system_matrices_match_model() {
        let k = system_matrices(0.5, 1.0 / 120.0).unwrap();
        assert_eq!(k.a, Mat::from_rows(&[[1.0, 0.0], [0.5, 0.0]]));
        let dt = 1.0 / 120.0;
        assert_eq!(
            k.b,
            Mat::from_rows(&[[dt, -dt, 0.0, 0.0, 0.0], [0.0, 0.0, dt, -dt, 0.0]])
        );
        assert_eq!(k.d, k.b.scale(-1.0));
        assert_eq!(k.c, Mat::from_rows(&[[0.0, 1.0]]));
        assert_eq!(k.e, Mat::from_rows(&[[0.0, 0.0, 0.0, 0.0, 1.0]]));

        let k1 = system_matrices(1.0, 1.0).unwrap();
        assert_eq!(k1.a, Mat::from_rows(&[[1.0, 0.0], [1.0, 0.0]]));
        assert!(matches!(system_matrices(0.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(system_matrices(1.2, 1.0), Err(Error::Domain(_))));
        assert!(matches!(system_matrices(0.5, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn identity_substitution_bands() {
        let k = system_matrices(0.5, 1.0 / 120.0)
            .unwrap()
            .with_theta_bound(0.08)
            .unwrap();
        let vars = LmiVars {
            p: SymMatrix::identity(2),
            r: [0.0, 0.0],
            mu1: 1.0,
            mu2: 1.0,
            mu3: 1.0,
        };
        let m = assemble_theorem_lmi(&k, &vars);
        assert_eq!(m.dim(), THEOREM_DIM);
        assert!(m.is_symmetric());
        assert_eq!(block(&m, 2, 4, 2, 2), k.a);
        assert_eq!(block(&m, 6, 6, 2, 2), Mat::zeros(2, 2));
        assert_eq!(block(&m, 0, 2, 2, 2), Mat::identity(2).scale(0.08));
        assert_eq!(block(&m, 2, 8, 2, 5), k.d);
        assert_eq!(block(&m, 4, 4, 2, 2), Mat::zeros(2, 2));
    }

    #[test]
    fn zero_theta_bound_decouples_first_band() {
        let k = system_matrices(0.3, 1.0 / 120.0).unwrap();
        let p = Mat::from_rows(&[[5.0, 1.0], [1.0, 7.0]]).to_sym_upper();
        let vars = LmiVars {
            p,
            r: [1.0, 2.0],
            mu1: 0.5,
            mu2: 3.0,
            mu3: 0.2,
        };
        let m = assemble_theorem_lmi(&k, &vars);
        assert_eq!(block(&m, 0, 2, 2, 2), Mat::zeros(2, 2));
    }

    #[test]
    fn feasible_point_forces_mu_order_and_p_above_identity() {
        // deadbeat gain with a hand-tuned P; the diagonal bands alone certify
        // mu3 < mu1 and P > I whenever the full matrix is negative definite
        let k = system_matrices(0.5, 1.0 / 120.0)
            .unwrap()
            .with_theta_bound(0.08)
            .unwrap();
        let p = Mat::from_rows(&[[40.0, -60.0], [-60.0, 130.0]]).to_sym_upper();
        let vars = LmiVars::from_gain(p, [2.0, 1.0], 0.4, 50.0, 0.39);
        let m = assemble_theorem_lmi(&k, &vars);
        if is_negative_definite(&m, 0.0) {
            assert!(vars.mu3 < vars.mu1);
            let eig = eigenvalue_oracle(&vars.p).unwrap();
            assert!(eig[0] > 1.0);
        }
        let infeasible = LmiVars::from_gain(SymMatrix::identity(2).scale(0.5), [2.0, 1.0], 1.0, 1.0, 0.5);
        assert!(!is_negative_definite(&assemble_theorem_lmi(&k, &infeasible), 0.0));
    }

    #[test]
    fn certificate_at_zero_gain_and_theta() {
        let k = system_matrices(0.5, 1.0 / 120.0).unwrap();
        let vars = LmiVars {
            p: SymMatrix::identity(2).scale(2.0),
            r: [0.0, 0.0],
            mu1: 1.0,
            mu2: 1.0,
            mu3: 0.5,
        };
        let cert = certificate_matrices(&k, &vars, 0.0).unwrap();
        let expected_w = k.a.hcat(&Mat::zeros(2, 2)).hcat(&k.d);
        assert_eq!(cert.w, expected_w);
        assert_eq!(cert.u, SymMatrix::from_diag(&[-1.0; 9]));
        assert_eq!(cert.coupled.dim(), 11);
        assert!(cert.coupled.is_symmetric());
    }

    #[test]
    fn singular_p_is_rejected() {
        let k = system_matrices(0.5, 1.0 / 120.0).unwrap();
        let vars = LmiVars {
            p: SymMatrix::zeros(2),
            r: [1.0, 0.0],
            mu1: 1.0,
            mu2: 1.0,
            mu3: 0.5,
        };
        assert!(matches!(
            certificate_matrices(&k, &vars, 0.0),
            Err(Error::SingularP)
        ));
    }

    #[test]
    fn young_slack_skipped_at_zero_bound() {
        let k = system_matrices(0.5, 1.0 / 120.0).unwrap();
        let vars = LmiVars::from_gain(SymMatrix::identity(2).scale(3.0), [2.0, 1.0], 1.0, 1.0, 0.5);
        assert!(young_slack(&k, &vars, 0.0).is_none());
    }
}
