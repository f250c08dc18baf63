//! Constant coefficients of the homogenized equations.
//!
//! With `M_k = <H^-k>`, `theta_j = M_j/M_1` and `theta_hat_j = M_j/M_1^2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::unit_cell::{CellFunction, PeriodicProfile, DEFAULT_CELL_POINTS};

/// Highest inverse-depth moment needed (the fifth-order terms use `theta_7`).
pub const MAX_MOMENT: usize = 7;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomogenizedCoefficients {
    pub g: f64,
    pub c: f64,
    /// `moments[k] = <H^-k>` for `k = 1..=7`; `moments[0] = 1`.
    pub moments: [f64; MAX_MOMENT + 1],
    pub mu: f64,
    pub gamma: f64,
    pub nu1: f64,
    pub nu2: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    pub alpha4: f64,
    pub alpha5: f64,
    pub alpha6: f64,
    pub alpha7: f64,
    pub alpha8: f64,
    pub alpha9: f64,
    pub alpha_hat4: f64,
    pub alpha_hat6: f64,
    pub alpha_hat8: f64,
    pub alpha_hat9: f64,
    pub alpha_hat10: f64,
    pub alpha_hat11: f64,
    /// `theta[j] = M_j / M_1`.
    pub theta: [f64; MAX_MOMENT + 1],
    /// `theta_hat[j] = M_j / M_1^2`.
    pub theta_hat: [f64; MAX_MOMENT + 1],
    pub zeta13: f64,
    pub zeta14: f64,
    pub zeta22: f64,
    pub zeta212: f64,
    pub zeta122: f64,
    pub zeta311: f64,
    /// `beta[i-1] = beta_i`, only for translation-even profiles.
    pub beta: Option<[f64; 14]>,
    pub translation_even: bool,
}

/// Bracket moments that cannot be reduced to inverse-depth moments.
struct BracketMoments {
    b11: f64,
    b12: f64,
    n1: f64,
    n2: f64,
    b13: f64,
    b14: f64,
    b22: f64,
    z212: f64,
    z122: f64,
    z311: f64,
}

fn bracket_moments<T: CellFunction>(p: &[T]) -> Result<BracketMoments> {
    let b: Vec<T> = p.iter().map(|f| f.bracket()).collect();
    let bb1 = b[1].bracket();
    let pm = |fs: &[&T]| crate::unit_cell::product_mean(fs);
    Ok(BracketMoments {
        b11: pm(&[&b[1], &b[1]])?,
        b12: pm(&[&b[1], &b[2]])?,
        n1: pm(&[&p[1], &bb1, &bb1])?,
        n2: pm(&[&bb1, &bb1])?,
        b13: pm(&[&b[1], &b[3]])?,
        b14: pm(&[&b[1], &b[4]])?,
        b22: pm(&[&b[2], &b[2]])?,
        z212: pm(&[&p[2], &b[1], &b[2]])?,
        z122: pm(&[&p[1], &b[2], &b[2]])?,
        z311: pm(&[&p[3], &b[1], &b[1]])?,
    })
}

impl HomogenizedCoefficients {
    /// Coefficients from `profile` under gravity `g`, with the default cell resolution
    /// for profiles that need a grid.
    pub fn compute(profile: &PeriodicProfile, g: f64) -> Result<Self> {
        Self::compute_with(profile, g, DEFAULT_CELL_POINTS)
    }

    pub fn compute_with(profile: &PeriodicProfile, g: f64, n: usize) -> Result<Self> {
        profile.validate()?;
        if !(g > 0.0) || !g.is_finite() {
            return Err(Error::NonPositiveGravity(g));
        }
        let mut mk = [1.0; MAX_MOMENT + 1];
        for (k, m) in mk.iter_mut().enumerate().skip(1) {
            *m = profile.moment(k as u32)?;
        }
        let bm = if profile.power_exact(1).is_some() {
            let p: Vec<_> = (0..=4)
                .map(|k| profile.inverse_power_exact(k).expect("piecewise-constant"))
                .collect();
            bracket_moments(&p)?
        } else {
            let h = profile.grid(n)?;
            let p: Vec<_> = (0..=4).map(|k| h.powi(-(k as i32))).collect();
            bracket_moments(&p)?
        };
        let even = profile.is_translation_even();
        Ok(Self::from_parts(g, mk, &bm, even))
    }

    fn from_parts(g: f64, mk: [f64; MAX_MOMENT + 1], bm: &BracketMoments, even: bool) -> Self {
        let [_, m1, m2, m3, m4, m5, ..] = mk;
        let m1s = m1 * m1;
        let m1c = m1s * m1;
        let mut theta = [0.0; MAX_MOMENT + 1];
        let mut theta_hat = [0.0; MAX_MOMENT + 1];
        for j in 0..=MAX_MOMENT {
            theta[j] = mk[j] / m1;
            theta_hat[j] = mk[j] / m1s;
        }
        let mu = bm.b11 / m1s;
        let gamma = bm.b12 / m1s;
        let t2 = theta[2];
        let c = (g / m1).sqrt();
        let zeta13 = bm.b13 / m1s;
        let zeta14 = bm.b14 / m1c;
        let zeta22 = bm.b22 / m1s;
        let zeta212 = bm.z212 / m1c;
        let zeta122 = bm.z122 / m1c;
        let zeta311 = bm.z311 / m1c;
        let mut out = HomogenizedCoefficients {
            g,
            c,
            moments: mk,
            mu,
            gamma,
            nu1: bm.n1 / m1c,
            nu2: 3.0 * bm.n2 / m1s,
            alpha1: 2.0 * (m2 * m2 - 2.0 * m3 * m1) / m1s,
            alpha2: (3.0 * m2 * m2 - 2.0 * m1 * m3 - 3.0 * m4) / (2.0 * m1s),
            alpha3: (m2 * m2 - m3 * m1) / m1c,
            alpha4: (3.0 * m2.powi(3) - 4.0 * m1 * m2 * m3 - 3.0 * m2 * m4 + 4.0 * m1 * m5) / m1s,
            alpha5: (2.0 * m2.powi(3) - 6.0 * m1 * m2 * m3 + 6.0 * m1s * m4) / m1c,
            alpha6: (3.0 * m2.powi(3) - 7.0 * m1 * m2 * m3 + 3.0 * m1s * m4 - 3.0 * m2 * m4
                + 6.0 * m1 * m5)
                / m1c,
            alpha7: (m2.powi(3) - 2.0 * m1 * m2 * m3 + m1s * m4) / (m1c * m1),
            alpha8: 2.0 * (mu * t2 - gamma),
            alpha9: mu * t2,
            alpha_hat4: (4.0 * m5 - 2.0 * m2 * m3) / m1s,
            alpha_hat6: (5.0 * m2 * m3 - 3.0 * m1 * m4 - 6.0 * m5) / m1s,
            alpha_hat8: -4.0 * gamma + 10.0 * mu * t2,
            alpha_hat9: 8.0 * mu * t2 / m1,
            alpha_hat10: (3.0 * mu * t2 - 2.0 * gamma) / m1,
            alpha_hat11: 4.0 * mu * t2,
            theta,
            theta_hat,
            zeta13,
            zeta14,
            zeta22,
            zeta212,
            zeta122,
            zeta311,
            beta: None,
            translation_even: even,
        };
        if even {
            out.beta = Some(out.betas());
        }
        out
    }

    fn betas(&self) -> [f64; 14] {
        let c2 = self.c * self.c;
        let (mu, gm) = (self.mu, self.gamma);
        let th = &self.theta;
        let tt = &self.theta_hat;
        let (t2, t3, t4, t5, t7) = (th[2], th[3], th[4], th[5], th[7]);
        let (h4, h5, h6) = (tt[4], tt[5], tt[6]);
        let m1 = self.moments[1];
        let (z13, z14, z22) = (self.zeta13, self.zeta14, self.zeta22);
        let (z212, z122, z311) = (self.zeta212, self.zeta122, self.zeta311);
        let t22 = t2 * t2;
        let t24 = t22 * t22;
        [
            (t3 * t3 - 5.25 * t22 * t3 + 1.5 * t2 * t4 + 1.5 * t3 * h4 + 7.5 * t2 * h5 - 2.5 * h6
                - 3.75 * t7 / (m1 * m1)
                + 2.25 * (t22 - h4).powi(2))
                / c2,
            // the squared theta_3 term makes the flat-bottom limit vanish
            c2 * (t24 - 3.0 * t22 * t3 + t3 * t3 + 2.0 * t2 * t4 - t5),
            -6.0 * t5 - 15.0 * h6 + 4.5 * t24 - 16.0 * t22 * t3 + 7.0 * t3 * t3 + 12.0 * t2 * t4
                - 4.5 * t22 * h4
                + 3.0 * t3 * h4
                + 12.0 * t2 * h5,
            (-20.0 * h6 + 6.0 * t24 - 22.0 * t22 * t3 + 8.0 * t3 * t3 + 12.0 * t2 * t4
                - 6.0 * t22 * h4
                + 6.0 * t3 * h4
                + 16.0 * t2 * h5)
                / c2,
            c2 * (-2.0 * z13 + z122 + 2.0 * z212 + z311 + 3.0 * z14 - 3.0 * gm * t2 - z22
                + 8.0 * mu * t22
                - 2.0 * mu * t3
                - 3.0 * mu * h4),
            c2 * (-16.0 * gm * t2 + 26.0 * mu * t22 - 10.0 * mu * t3),
            c2 * (2.0 * z13 + z22 - 6.0 * gm * t2 + 5.0 * mu * t22 - 2.0 * mu * t3),
            4.0 * z122 + 8.0 * z212 + 4.0 * z311 + 12.0 * z14 - 12.0 * gm * t2 - 2.0 * z22
                - 4.0 * z13
                + 27.0 * mu * t22
                - 6.0 * mu * t3
                - 9.0 * mu * h4,
            2.0 * t24 - 8.0 * t22 * t3 + 4.0 * t3 * t3 + 8.0 * t2 * t4 - 8.0 * t5,
            -4.0 * z13 - 2.0 * z22 - 8.0 * gm * t2 + 28.0 * mu * t22 - 12.0 * mu * t3,
            2.0 * z13 + z22 - 12.0 * gm * t2 + 22.0 * mu * t22 - 10.0 * mu * t3,
            z122 + 2.0 * z212 + z311 + 3.0 * z14 - 3.0 * gm * t2 + mu * t3 - z22 - 2.0 * z13
                + 7.0 * mu * t22
                - 2.0 * mu * t3
                - 3.0 * mu * h4,
            8.0 * z13 + 4.0 * z22 - 28.0 * gm * t2 + 24.0 * mu * t22 - 8.0 * mu * t3,
            -8.0 * gm * t2 + 10.0 * mu * t22 - 4.0 * mu * t3,
        ]
    }

    /// `<H^-2>/<H^-1>`, the quadratic-flux coefficient.
    pub fn kappa2(&self) -> f64 {
        self.theta[2]
    }

    /// `nu1 + nu2 - mu^2`, the quartic elliptic coefficient.
    pub fn stability_margin(&self) -> f64 {
        self.nu1 + self.nu2 - self.mu * self.mu
    }

    pub fn is_flat(&self) -> bool {
        self.mu <= 1e-14 * self.theta[2].powi(2).max(1.0)
    }

    /// `beta_i` for `i = 1..=14` when available.
    pub fn beta_i(&self, i: usize) -> Option<f64> {
        self.beta.and_then(|b| b.get(i.wrapping_sub(1)).copied())
    }

    /// Every scalar as `(name, value)` in a fixed order.
    pub fn key_values(&self) -> Vec<(String, f64)> {
        let mut v: Vec<(String, f64)> = vec![
            ("g".into(), self.g),
            ("c".into(), self.c),
            ("mu".into(), self.mu),
            ("gamma".into(), self.gamma),
            ("nu1".into(), self.nu1),
            ("nu2".into(), self.nu2),
            ("stability_margin".into(), self.stability_margin()),
        ];
        for (k, m) in self.moments.iter().enumerate().skip(1) {
            v.push((format!("moment{k}"), *m));
        }
        let alphas = [
            self.alpha1, self.alpha2, self.alpha3, self.alpha4, self.alpha5, self.alpha6,
            self.alpha7, self.alpha8, self.alpha9,
        ];
        for (i, a) in alphas.iter().enumerate() {
            v.push((format!("alpha{}", i + 1), *a));
        }
        v.push(("alpha_hat4".into(), self.alpha_hat4));
        v.push(("alpha_hat6".into(), self.alpha_hat6));
        v.push(("alpha_hat8".into(), self.alpha_hat8));
        v.push(("alpha_hat9".into(), self.alpha_hat9));
        v.push(("alpha_hat10".into(), self.alpha_hat10));
        v.push(("alpha_hat11".into(), self.alpha_hat11));
        for j in 2..=MAX_MOMENT {
            v.push((format!("theta{j}"), self.theta[j]));
        }
        for j in 2..=MAX_MOMENT {
            v.push((format!("theta_hat{j}"), self.theta_hat[j]));
        }
        v.push(("zeta13".into(), self.zeta13));
        v.push(("zeta14".into(), self.zeta14));
        v.push(("zeta22".into(), self.zeta22));
        v.push(("zeta212".into(), self.zeta212));
        v.push(("zeta122".into(), self.zeta122));
        v.push(("zeta311".into(), self.zeta311));
        if let Some(b) = self.beta {
            for (i, x) in b.iter().enumerate() {
                v.push((format!("beta{}", i + 1), *x));
            }
        }
        v.push((
            "translation_even".into(),
            if self.translation_even { 1.0 } else { 0.0 },
        ));
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PwcClosedForm {
    pub mu: f64,
    pub nu1: f64,
    pub nu2: f64,
    pub stability_margin: f64,
}

/// Closed forms for the two-layer profile with inverse depths `d1`, `d2` on equal halves.
pub fn pwc_closed_form(d1: f64, d2: f64) -> Result<PwcClosedForm> {
    if !(d1 > 0.0 && d2 > 0.0) || !d1.is_finite() || !d2.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "inverse depths must be positive, got {d1}, {d2}"
        )));
    }
    let s = d1 + d2;
    let dd = (d1 - d2).powi(2);
    let mu = dd / (48.0 * s * s);
    Ok(PwcClosedForm {
        mu,
        nu1: mu / 40.0,
        nu2: 3.0 * mu / 40.0,
        stability_margin: dd * (19.0 * d1 * d1 + 58.0 * d1 * d2 + 19.0 * d2 * d2)
            / (11520.0 * s.powi(4)),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SignCheck {
    pub name: &'static str,
    pub value: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SignReport {
    /// Constant depth: bracket-derived inequalities sit on their equality boundary.
    pub degenerate_flat: bool,
    pub checks: Vec<SignCheck>,
}

impl SignReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Sign guarantees: `alpha1 < 0`, `alpha2 < 0`, `alpha3 <= 0`, `mu > 0`, `nu1 + nu2 - mu^2 > 0`.
pub fn sign_report(coeffs: &HomogenizedCoefficients) -> SignReport {
    let flat = coeffs.is_flat();
    // roundoff floor for the alpha3 numerator cancellation
    let eps3 = 1e-12 * coeffs.moments[2].powi(2) / coeffs.moments[1].powi(3);
    let margin = coeffs.stability_margin();
    let checks = vec![
        SignCheck { name: "alpha1 < 0", value: coeffs.alpha1, passed: coeffs.alpha1 < 0.0 },
        SignCheck { name: "alpha2 < 0", value: coeffs.alpha2, passed: coeffs.alpha2 < 0.0 },
        SignCheck {
            name: "alpha3 <= 0",
            value: coeffs.alpha3,
            passed: if flat { coeffs.alpha3 <= eps3 } else { coeffs.alpha3 < 0.0 },
        },
        SignCheck {
            name: "mu > 0",
            value: coeffs.mu,
            passed: if flat { coeffs.mu >= 0.0 } else { coeffs.mu > 0.0 },
        },
        SignCheck {
            name: "nu1 + nu2 - mu^2 > 0",
            value: margin,
            passed: if flat { margin >= -1e-30 } else { margin > 0.0 },
        },
    ];
    SignReport {
        degenerate_flat: flat,
        checks,
    }
}
