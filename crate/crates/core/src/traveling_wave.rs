//! Traveling waves `eta(x - V t)`, `q = V eta`, of the homogenized system.
//!
//! At third order the profile obeys `mu_hat V^2 eta'' = F(eta)`, a particle in the
//! potential `U`; the solitary wave is the separatrix through the origin. At fifth
//! order the profile solves a fourth-order boundary-value problem by Newton iteration.

use serde::{Deserialize, Serialize};

use crate::banded::BandMatrix;
use crate::coefficients::HomogenizedCoefficients;
use crate::error::{Error, Result};
use crate::rk::{error_norm, Integrator, StepControl, Stepper, Tolerance};

/// Constants of the traveling-wave reduction at speed `V`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveConstants {
    pub v: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub gamma4: f64,
    pub gamma5: f64,
    pub gamma6: f64,
    pub mu_hat: f64,
    pub nu_hat: f64,
    pub beta_hat: [f64; 5],
}

pub fn gammas(coeffs: &HomogenizedCoefficients, v: f64, delta: f64) -> WaveConstants {
    let c2 = coeffs.c * coeffs.c;
    let v2 = v * v;
    let g = coeffs.g;
    let d2 = delta * delta;
    let d3 = d2 * delta;
    let bh2 = delta * coeffs.kappa2();
    let bh = [bh2 * c2, bh2, -d2 * coeffs.alpha1, -d2 * coeffs.alpha2, -g * d2 * coeffs.alpha3];
    WaveConstants {
        v,
        gamma1: v2 - c2,
        gamma2: 0.5 * bh[0] + v2 * bh[1],
        gamma3: ((bh[2] + bh[3]) * v2 + bh[4]) / 3.0,
        gamma4: 0.25
            * d3
            * (coeffs.alpha4 * v2 * v2 / g + (coeffs.alpha5 + coeffs.alpha6) * v2 + g * coeffs.alpha7),
        gamma5: d3 * (coeffs.alpha8 * v2 + 2.5 * coeffs.alpha9 * c2),
        gamma6: d3 * (0.5 * coeffs.alpha8 * c2 + coeffs.alpha9 * v2),
        mu_hat: d2 * coeffs.mu,
        nu_hat: d2 * d2 * v2 * coeffs.stability_margin(),
        beta_hat: bh,
    }
}

impl WaveConstants {
    /// Coefficient of `eta''`.
    fn inertia(&self) -> f64 {
        self.mu_hat * self.v * self.v
    }

    /// Linear decay rate of the solitary tails, `sqrt(gamma1 / (mu_hat V^2))`.
    pub fn decay_rate(&self) -> Result<f64> {
        if !(self.mu_hat > 0.0) {
            return Err(Error::FlatBottom);
        }
        if !(self.gamma1 > 0.0) {
            return Err(Error::Subcritical { gamma1: self.gamma1 });
        }
        Ok((self.gamma1 / self.inertia()).sqrt())
    }

    fn force(&self, eta: f64) -> f64 {
        (self.gamma1 * eta - self.gamma2 * eta * eta + self.gamma3 * eta.powi(3)) / self.inertia()
    }

    fn pot(&self, eta: f64) -> f64 {
        let e2 = eta * eta;
        (-0.5 * self.gamma1 * e2 + self.gamma2 * e2 * eta / 3.0 - 0.25 * self.gamma3 * e2 * e2)
            / self.inertia()
    }

    /// Smallest positive root of `a x^2 + b x + c = 0`.
    fn smallest_positive_root(a: f64, b: f64, c: f64) -> Option<f64> {
        if a == 0.0 {
            let r = -c / b;
            return (b != 0.0 && r > 0.0).then_some(r);
        }
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            return None;
        }
        let sq = disc.sqrt();
        let q = -0.5 * (b + b.signum() * sq);
        let mut roots = [q / a, if q != 0.0 { c / q } else { f64::NAN }];
        roots.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
        roots.into_iter().find(|&r| r > 0.0)
    }

    /// Separatrix amplitude: first positive zero of `U`.
    pub fn separatrix_amplitude(&self) -> Option<f64> {
        Self::smallest_positive_root(-0.25 * self.gamma3, self.gamma2 / 3.0, -0.5 * self.gamma1)
    }

    /// Bottom of the potential well: first positive zero of `F`.
    pub fn well(&self) -> Option<f64> {
        Self::smallest_positive_root(self.gamma3, -self.gamma2, self.gamma1)
    }
}

/// Potential `U(eta)` and force `F(eta) = -U'(eta)` of the third-order reduction.
pub fn potential(eta: f64, k: &WaveConstants) -> Result<(f64, f64)> {
    if !(k.mu_hat * k.v * k.v > 0.0) {
        return Err(Error::FlatBottom);
    }
    Ok((k.pot(eta), k.force(eta)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TravelingWaveSolution {
    /// Uniform grid in `xi = x - V t`.
    pub xi: Vec<f64>,
    pub eta: Vec<f64>,
    /// `d eta / d xi` on the same grid.
    pub deta: Vec<f64>,
    pub v: f64,
    pub order: u8,
    /// First-integral level (order 3 only).
    pub energy_level: Option<f64>,
    /// Spatial period for periodic waves.
    pub period: Option<f64>,
}

impl TravelingWaveSolution {
    pub fn amplitude(&self) -> f64 {
        self.eta.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn spacing(&self) -> f64 {
        self.xi[1] - self.xi[0]
    }

    pub fn q(&self) -> Vec<f64> {
        self.eta.iter().map(|e| self.v * e).collect()
    }

    /// Four-point interpolation; zero outside the window (periodic for periodic waves).
    pub fn eval(&self, xi: f64) -> f64 {
        let n = self.xi.len();
        let h = self.spacing();
        let x0 = self.xi[0];
        let s = match self.period {
            Some(p) => ((xi - x0).rem_euclid(p)) / h,
            None => (xi - x0) / h,
        };
        if self.period.is_none() && (s < 0.0 || s > (n - 1) as f64) {
            return 0.0;
        }
        let i0 = s.floor() as isize;
        let t = s - i0 as f64;
        let at = |k: isize| -> f64 {
            let j = i0 + k;
            match self.period {
                Some(_) => self.eta[j.rem_euclid(n as isize) as usize],
                None if j < 0 || j >= n as isize => 0.0,
                None => self.eta[j as usize],
            }
        };
        let (fm, f0, f1, f2) = (at(-1), at(0), at(1), at(2));
        -t * (t - 1.0) * (t - 2.0) / 6.0 * fm + (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0 * f0
            - (t + 1.0) * t * (t - 2.0) / 2.0 * f1
            + (t + 1.0) * t * (t - 1.0) / 6.0 * f2
    }
}

/// Uniform `xi` window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XiWindow {
    pub half_length: f64,
    pub spacing: f64,
}

impl XiWindow {
    /// `+-40` tail lengths with `50` points per tail length.
    pub fn default_for(k: &WaveConstants) -> Result<Self> {
        let w = 1.0 / k.decay_rate()?;
        Ok(XiWindow {
            half_length: 40.0 * w,
            spacing: w / 50.0,
        })
    }

    fn grid(&self) -> Vec<f64> {
        let m = (self.half_length / self.spacing).round().max(2.0) as usize;
        let h = self.half_length / m as f64;
        (0..=2 * m).map(|j| (j as f64 - m as f64) * h).collect()
    }
}

const ODE_TOL: Tolerance = Tolerance { rtol: 1e-12, atol: 1e-24 };

fn ode(k: WaveConstants) -> impl FnMut(f64, &[f64], &mut [f64]) -> Result<()> {
    move |_t, y, dy| {
        dy[0] = y[1];
        dy[1] = k.force(y[0]);
        Ok(())
    }
}

/// Integrate `(eta, eta')` from `y0` until `eta'` first becomes non-positive.
/// Returns the `xi` at which `eta' = 0` and the state there.
fn integrate_to_turn(k: &WaveConstants, y0: [f64; 2], xi_max: f64) -> Result<(f64, [f64; 2])> {
    let mut f = ode(*k);
    let mut st = Stepper::new(2);
    let mut y = y0;
    let mut yn = [0.0; 2];
    let mut err = [0.0; 2];
    let mut t = 0.0;
    let mut h = 1e-3 / k.decay_rate()?;
    let scale = k.separatrix_amplitude().unwrap_or(1.0).abs().max(1e-300);
    loop {
        if t > xi_max {
            return Err(Error::NoSolitaryWave(format!(
                "no turning point within xi = {xi_max:.3e}"
            )));
        }
        st.try_step(&mut f, t, &y, h, &mut yn, Some(&mut err))?;
        let en = error_norm(&err, &y, &yn, ODE_TOL);
        if !(en.is_finite() && yn.iter().all(|v| v.is_finite())) || yn[0].abs() > 1e6 * scale {
            return Err(Error::NoSolitaryWave("orbit escapes to infinity".into()));
        }
        if en > 1.0 {
            h *= (0.9 * en.powf(-0.2)).clamp(0.1, 0.9);
            if h < 1e-300 {
                return Err(Error::StepUnderflow { t, dt: h });
            }
            continue;
        }
        if yn[1] <= 0.0 {
            // bisect the step size for eta' = 0
            let (mut lo, mut hi) = (0.0, h);
            let mut y_hi = yn;
            for _ in 0..200 {
                if hi - lo <= 1e-13 * (t + hi).max(1e-300) {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                st.try_step(&mut f, t, &y, mid, &mut yn, None)?;
                if yn[1] <= 0.0 {
                    hi = mid;
                    y_hi = yn;
                } else {
                    lo = mid;
                }
            }
            return Ok((t + hi, y_hi));
        }
        t += h;
        y = yn;
        st.accept();
        h *= if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
    }
}

/// Tabulate the orbit from `y0` at increasing abscissae `s` (all `>= 0`).
fn tabulate(k: &WaveConstants, y0: [f64; 2], s: &[f64]) -> Result<Vec<[f64; 2]>> {
    let mut f = ode(*k);
    let mut it = Integrator::new(2, StepControl::Adaptive(ODE_TOL));
    it.h = Some(1e-3 / k.decay_rate()?);
    let mut y = y0;
    let mut t = 0.0;
    let mut out = Vec::with_capacity(s.len());
    for &si in s {
        it.advance(&mut f, &mut t, &mut y, si)?;
        out.push(y);
    }
    Ok(out)
}

const SEED: f64 = 1e-9;

/// Third-order solitary wave at speed `v`, crest at `xi = 0`.
pub fn solitary_wave_o3(
    coeffs: &HomogenizedCoefficients,
    v: f64,
    delta: f64,
    window: Option<XiWindow>,
) -> Result<TravelingWaveSolution> {
    let k = gammas(coeffs, v, delta);
    let kappa = k.decay_rate()?;
    let window = match window {
        Some(w) => w,
        None => XiWindow::default_for(&k)?,
    };
    let y0 = [SEED, kappa * SEED];
    let (xi_turn, _) = integrate_to_turn(&k, y0, 200.0 / kappa + window.half_length)?;
    let xi = window.grid();
    let m = xi.len() / 2;
    // distance from the seed point for xi >= 0, ascending when walking outside-in
    let mut s_pos: Vec<(usize, f64)> = (m..xi.len()).map(|j| (j, xi_turn - xi[j])).collect();
    s_pos.reverse();
    let inside: Vec<f64> = s_pos.iter().filter(|p| p.1 >= 0.0).map(|p| p.1).collect();
    let tab = tabulate(&k, y0, &inside)?;
    let mut eta = vec![0.0; xi.len()];
    let mut deta = vec![0.0; xi.len()];
    let mut ti = 0;
    for &(j, s) in &s_pos {
        let (e, d) = if s >= 0.0 {
            let y = tab[ti];
            ti += 1;
            (y[0], y[1])
        } else {
            // linear tail beyond the seed point
            let e = SEED * (kappa * s).exp();
            (e, kappa * e)
        };
        eta[j] = e;
        deta[j] = -d;
        let mirror = 2 * m - j;
        eta[mirror] = e;
        deta[mirror] = d;
    }
    deta[m] = 0.0;
    Ok(TravelingWaveSolution {
        xi,
        eta,
        deta,
        v,
        order: 3,
        energy_level: Some(0.0),
        period: None,
    })
}

/// Third-order periodic wave at energy `energy in (min U, 0)`, one period sampled at `n` points.
pub fn periodic_wave_o3(
    coeffs: &HomogenizedCoefficients,
    v: f64,
    delta: f64,
    energy: f64,
    n: usize,
) -> Result<TravelingWaveSolution> {
    let k = gammas(coeffs, v, delta);
    let kappa = k.decay_rate()?;
    let well = k
        .well()
        .ok_or_else(|| Error::NoSolitaryWave("potential has no well".into()))?;
    let sep = k
        .separatrix_amplitude()
        .ok_or_else(|| Error::NoSolitaryWave("no separatrix".into()))?;
    let umin = k.pot(well);
    if !(energy > umin && energy < 0.0) {
        return Err(Error::EnergyOutOfBand { energy, min: umin });
    }
    let root = |mut lo: f64, mut hi: f64| {
        let flo = k.pot(lo) - energy;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (k.pot(mid) - energy).signum() == flo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 4.0 * f64::EPSILON * hi.abs() {
                break;
            }
        }
        0.5 * (lo + hi)
    };
    let eta_a = root(0.0, well);
    let eta_b = root(well, sep);
    let window = XiWindow::default_for(&k)?.half_length * 2.0;
    let (half, _) = match integrate_to_turn(&k, [eta_a, 0.0], 0.5 * window) {
        Ok(r) => r,
        Err(Error::NoSolitaryWave(_)) => return Err(Error::PeriodExceedsWindow { window }),
        Err(e) => return Err(e),
    };
    let period = 2.0 * half;
    let _ = kappa;
    let hstep = period / n as f64;
    let xi: Vec<f64> = (0..n).map(|j| j as f64 * hstep).collect();
    let s: Vec<f64> = xi.iter().map(|&x| if x <= half { x } else { period - x }).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s[a].partial_cmp(&s[b]).unwrap());
    let sorted: Vec<f64> = order.iter().map(|&i| s[i]).collect();
    let tab = tabulate(&k, [eta_a, 0.0], &sorted)?;
    let mut eta = vec![0.0; n];
    let mut deta = vec![0.0; n];
    for (pos, &i) in order.iter().enumerate() {
        eta[i] = tab[pos][0];
        deta[i] = if xi[i] <= half { tab[pos][1] } else { -tab[pos][1] };
    }
    let _ = eta_b;
    Ok(TravelingWaveSolution {
        xi,
        eta,
        deta,
        v,
        order: 3,
        energy_level: Some(energy),
        period: Some(period),
    })
}

/// Turning points `(eta_A, eta_B)` of the periodic orbit at `energy`.
pub fn turning_points(k: &WaveConstants, energy: f64) -> Result<(f64, f64)> {
    let well = k
        .well()
        .ok_or_else(|| Error::NoSolitaryWave("potential has no well".into()))?;
    let sep = k
        .separatrix_amplitude()
        .ok_or_else(|| Error::NoSolitaryWave("no separatrix".into()))?;
    let umin = k.pot(well);
    if !(energy > umin && energy < 0.0) {
        return Err(Error::EnergyOutOfBand { energy, min: umin });
    }
    let root = |mut lo: f64, mut hi: f64| {
        let flo = k.pot(lo) - energy;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (k.pot(mid) - energy).signum() == flo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    Ok((root(0.0, well), root(well, sep)))
}

const D1_6: [f64; 7] = [-1.0 / 60.0, 3.0 / 20.0, -0.75, 0.0, 0.75, -3.0 / 20.0, 1.0 / 60.0];
const D2_6: [f64; 7] = [1.0 / 90.0, -3.0 / 20.0, 1.5, -49.0 / 18.0, 1.5, -3.0 / 20.0, 1.0 / 90.0];
const D4_6: [f64; 9] = [
    7.0 / 240.0,
    -0.4,
    169.0 / 60.0,
    -122.0 / 15.0,
    91.0 / 8.0,
    -122.0 / 15.0,
    169.0 / 60.0,
    -0.4,
    7.0 / 240.0,
];

fn stencil(e: &[f64], i: usize, c: &[f64]) -> f64 {
    let r = c.len() / 2;
    c.iter().enumerate().map(|(j, w)| w * e[i + j - r]).sum()
}

/// `max |eta'' - F(eta)|` over the interior, derivatives by sixth-order differences.
pub fn ode_residual_o3(sol: &TravelingWaveSolution, k: &WaveConstants) -> f64 {
    let h = sol.spacing();
    let e = &sol.eta;
    (3..e.len() - 3)
        .map(|i| (stencil(e, i, &D2_6) / (h * h) - k.force(e[i])).abs())
        .fold(0.0, f64::max)
}

/// `max |(eta')^2/2 + U(eta) - E|` along the tabulated orbit.
pub fn first_integral_drift(sol: &TravelingWaveSolution, k: &WaveConstants) -> f64 {
    let e0 = sol.energy_level.unwrap_or(0.0);
    sol.eta
        .iter()
        .zip(&sol.deta)
        .map(|(&e, &d)| (0.5 * d * d + k.pot(e) - e0).abs())
        .fold(0.0, f64::max)
}

/// Left-hand side of the fifth-order profile equation.
fn o5_operator(k: &WaveConstants, e: f64, d1: f64, d2: f64, d4: f64) -> f64 {
    -k.gamma1 * e + k.gamma2 * e * e - k.gamma3 * e.powi(3)
        + k.gamma4 * e.powi(4)
        + k.gamma5 * d1 * d1
        + k.gamma6 * (2.0 * e * d2 - d1 * d1)
        + k.inertia() * d2
        - k.nu_hat * d4
}

/// Residual of the fifth-order equation evaluated with sixth-order differences
/// (an estimate of how well the discrete profile solves the continuous problem).
pub fn continuous_residual_o5(sol: &TravelingWaveSolution, k: &WaveConstants) -> f64 {
    let h = sol.spacing();
    let e = &sol.eta;
    (4..e.len() - 4)
        .map(|i| {
            let d1 = stencil(e, i, &D1_6) / h;
            let d2 = stencil(e, i, &D2_6) / (h * h);
            let d4 = stencil(e, i, &D4_6) / h.powi(4);
            o5_operator(k, e[i], d1, d2, d4).abs()
        })
        .fold(0.0, f64::max)
}

/// Ghost-extended access with `eta_{-j} = eta_j` and `eta_{n-1+j} = eta_{n-1-j}`.
#[inline]
fn ghost(e: &[f64], i: isize) -> f64 {
    let n = e.len() as isize;
    let j = if i < 0 {
        -i
    } else if i >= n {
        2 * (n - 1) - i
    } else {
        i
    };
    e[j as usize]
}

/// Second-order discrete residual; rows `0` and `n-1` carry the Dirichlet conditions.
pub fn discrete_residual_o5(eta: &[f64], h: f64, k: &WaveConstants) -> Vec<f64> {
    let n = eta.len();
    let mut r = vec![0.0; n];
    r[0] = eta[0];
    r[n - 1] = eta[n - 1];
    for i in 1..n - 1 {
        let ii = i as isize;
        let (em2, em1, e0, ep1, ep2) = (
            ghost(eta, ii - 2),
            eta[i - 1],
            eta[i],
            eta[i + 1],
            ghost(eta, ii + 2),
        );
        let d1 = (ep1 - em1) / (2.0 * h);
        let d2 = (ep1 - 2.0 * e0 + em1) / (h * h);
        let d4 = (ep2 - 4.0 * ep1 + 6.0 * e0 - 4.0 * em1 + em2) / h.powi(4);
        r[i] = o5_operator(k, e0, d1, d2, d4);
    }
    r
}

fn jacobian_o5(eta: &[f64], h: f64, k: &WaveConstants) -> BandMatrix {
    let n = eta.len();
    let mut j = BandMatrix::zeros(n, 2, 2);
    j.set(0, 0, 1.0);
    j.set(n - 1, n - 1, 1.0);
    let h2 = h * h;
    let h4 = h2 * h2;
    for i in 1..n - 1 {
        let (em1, e0, ep1) = (eta[i - 1], eta[i], eta[i + 1]);
        let d1 = (ep1 - em1) / (2.0 * h);
        let d2 = (ep1 - 2.0 * e0 + em1) / h2;
        let diag = -k.gamma1 + 2.0 * k.gamma2 * e0 - 3.0 * k.gamma3 * e0 * e0
            + 4.0 * k.gamma4 * e0.powi(3)
            + 2.0 * k.gamma6 * d2;
        let c1 = 2.0 * (k.gamma5 - k.gamma6) * d1 / (2.0 * h);
        let c2 = (2.0 * k.gamma6 * e0 + k.inertia()) / h2;
        let c4 = -k.nu_hat / h4;
        j.add(i, i, diag - 2.0 * c2 + 6.0 * c4);
        j.add(i, i - 1, -c1 + c2 - 4.0 * c4);
        j.add(i, i + 1, c1 + c2 - 4.0 * c4);
        // fourth-difference neighbours, folded through the ghost reflection
        for (off, w) in [(-2isize, 1.0), (2, 1.0)] {
            let p = i as isize + off;
            let col = if p < 0 {
                -p
            } else if p >= n as isize {
                2 * (n as isize - 1) - p
            } else {
                p
            } as usize;
            j.add(i, col, w * c4);
        }
    }
    j
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Newton options for the fifth-order profile.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { tol: 1e-10, max_iter: 60 }
    }
}

fn newton(eta: &mut Vec<f64>, h: f64, k: &WaveConstants, opts: NewtonOptions) -> Result<usize> {
    let mut r = discrete_residual_o5(eta, h, k);
    let mut rn = max_abs(&r);
    // the h^-4 stencil amplifies rounding; never ask for less than its noise level
    let scale = k.nu_hat.abs() * 16.0 / h.powi(4) + k.inertia().abs() * 4.0 / (h * h) + k.gamma1.abs();
    let tol = opts.tol.max(8.0 * f64::EPSILON * max_abs(eta) * scale);
    for it in 0..opts.max_iter {
        if rn < tol {
            return Ok(it);
        }
        let jac = jacobian_o5(eta, h, k);
        let mut du: Vec<f64> = r.iter().map(|v| -v).collect();
        jac.solve_in_place(&mut du)?;
        // project out the near-null translation mode
        let n = du.len();
        for i in 0..n / 2 {
            let m = 0.5 * (du[i] + du[n - 1 - i]);
            du[i] = m;
            du[n - 1 - i] = m;
        }
        let mut lam = 1.0;
        loop {
            let trial: Vec<f64> = eta.iter().zip(&du).map(|(e, d)| e + lam * d).collect();
            let rt = discrete_residual_o5(&trial, h, k);
            let rtn = max_abs(&rt);
            if rtn.is_finite() && (rtn < rn || lam < 1.0 / 64.0) {
                *eta = trial;
                r = rt;
                rn = rtn;
                break;
            }
            lam *= 0.5;
        }
    }
    if rn < tol {
        Ok(opts.max_iter)
    } else {
        Err(Error::NewtonDiverged {
            residual: rn,
            iterations: opts.max_iter,
        })
    }
}

fn scaled(k: &WaveConstants, s: f64) -> WaveConstants {
    WaveConstants {
        gamma4: s * k.gamma4,
        gamma5: s * k.gamma5,
        gamma6: s * k.gamma6,
        nu_hat: s * k.nu_hat,
        ..*k
    }
}

/// Fifth-order solitary wave on the grid of `guess`, by Newton iteration from `guess`.
///
/// Falls back to continuation in the fifth-order terms when the direct iteration fails
/// or lands on a branch whose amplitude is far from the guess.
pub fn solitary_wave_o5(
    coeffs: &HomogenizedCoefficients,
    v: f64,
    delta: f64,
    guess: &TravelingWaveSolution,
) -> Result<TravelingWaveSolution> {
    solitary_wave_o5_with(coeffs, v, delta, guess, NewtonOptions::default())
}

pub fn solitary_wave_o5_with(
    coeffs: &HomogenizedCoefficients,
    v: f64,
    delta: f64,
    guess: &TravelingWaveSolution,
    opts: NewtonOptions,
) -> Result<TravelingWaveSolution> {
    solve_o5(&gammas(coeffs, v, delta), guess, opts)
}

/// Fifth-order profile for explicit wave constants (see [`solitary_wave_o5`]).
pub fn solve_o5(
    k: &WaveConstants,
    guess: &TravelingWaveSolution,
    opts: NewtonOptions,
) -> Result<TravelingWaveSolution> {
    let k = *k;
    let v = k.v;
    let a0 = max_abs(&guess.eta);
    if !(k.mu_hat > 0.0) || !(k.nu_hat > 0.0) {
        // without dispersion no localized profile balances the nonlinearity
        return Err(Error::TrivialSolution { max_abs: 0.0 });
    }
    let h = guess.spacing();
    let plausible = |e: &[f64]| {
        let a = max_abs(e);
        a > 0.5 * a0 && a < 2.0 * a0
    };
    let mut eta = guess.eta.clone();
    let direct = newton(&mut eta, h, &k, opts);
    let ok = matches!(direct, Ok(_)) && plausible(&eta);
    if !ok {
        eta = guess.eta.clone();
        let steps = 8;
        for s in 1..=steps {
            let ks = scaled(&k, s as f64 / steps as f64);
            newton(&mut eta, h, &ks, opts)?;
        }
    }
    let amax = max_abs(&eta);
    if amax < 1e-4 * a0 {
        return Err(Error::TrivialSolution { max_abs: amax });
    }
    let n = eta.len();
    let mut deta = vec![0.0; n];
    for i in 1..n - 1 {
        deta[i] = (eta[i + 1] - eta[i - 1]) / (2.0 * h);
    }
    Ok(TravelingWaveSolution {
        xi: guess.xi.clone(),
        eta,
        deta,
        v,
        order: 5,
        energy_level: None,
        period: None,
    })
}

fn amplitude_at(coeffs: &HomogenizedCoefficients, v: f64, delta: f64, order: u8) -> Result<f64> {
    let k = gammas(coeffs, v, delta);
    match order {
        3 => {
            let kappa = k.decay_rate()?;
            let (_, y) = integrate_to_turn(&k, [SEED, kappa * SEED], 400.0 / kappa)?;
            Ok(y[0])
        }
        5 => {
            let guess = solitary_wave_o3(coeffs, v, delta, None)?;
            Ok(solitary_wave_o5(coeffs, v, delta, &guess)?.amplitude())
        }
        _ => Err(Error::InvalidArgument(format!("order must be 3 or 5, got {order}"))),
    }
}

/// Speed whose solitary wave has crest height `target`, by bisection on `V > c`.
pub fn speed_for_amplitude(
    coeffs: &HomogenizedCoefficients,
    delta: f64,
    target: f64,
    order: u8,
) -> Result<f64> {
    if !(target > 0.0) {
        return Err(Error::InvalidArgument(format!("target amplitude must be positive, got {target}")));
    }
    let c = coeffs.c;
    let v_lo = c * (1.0 + 1e-4);
    let mut lo = v_lo;
    let mut hi = c * 1.01;
    loop {
        match amplitude_at(coeffs, hi, delta, order) {
            Ok(a) if a >= target => break,
            Ok(_) if hi < 1.5 * c => {
                lo = hi;
                hi = c + 2.0 * (hi - c);
            }
            Ok(_) | Err(Error::NoSolitaryWave(_)) => {
                return Err(Error::AmplitudeNotAttainable {
                    target,
                    v_lo,
                    v_hi: hi,
                })
            }
            Err(e) => return Err(e),
        }
    }
    if amplitude_at(coeffs, lo, delta, order)? > target {
        return Err(Error::AmplitudeNotAttainable { target, v_lo, v_hi: hi });
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        let a = amplitude_at(coeffs, mid, delta, order)?;
        if a < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if ((a - target) / target).abs() < 1e-8 {
            return Ok(mid);
        }
        if hi - lo < 1e-13 * c {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::unit_cell::PeriodicProfile;

    fn scen_a() -> HomogenizedCoefficients {
        HomogenizedCoefficients::compute(&PeriodicProfile::two_layer(1.0, 0.3), 9.81).unwrap()
    }

    #[test]
    fn gammas_basic() {
        let c = scen_a();
        let k = gammas(&c, c.c, 1.0);
        assert_eq!(k.gamma1, 0.0);
        let r = 1.023928;
        let k = gammas(&c, r * c.c, 1.0);
        assert!((k.gamma1 - c.c * c.c * (r * r - 1.0)).abs() < 1e-14);
        let flat = HomogenizedCoefficients::compute(&PeriodicProfile::flat(1.0), 9.81).unwrap();
        let kf = gammas(&flat, 1.1 * flat.c, 1.0);
        assert_eq!(kf.mu_hat, 0.0);
    }

    #[test]
    fn potential_consistency() {
        let c = scen_a();
        let k = gammas(&c, 1.02 * c.c, 1.0);
        let (u0, f0) = potential(0.0, &k).unwrap();
        assert_eq!((u0, f0), (0.0, 0.0));
        for &e in &[0.001, 0.01, 0.02] {
            let d = 1e-6;
            let du = (potential(e + d, &k).unwrap().0 - potential(e - d, &k).unwrap().0) / (2.0 * d);
            let f = potential(e, &k).unwrap().1;
            assert!((du + f).abs() < 1e-6 * f.abs().max(1.0));
        }
        assert!(potential(1e-4, &k).unwrap().1 > 0.0);
    }

    #[test]
    fn solitary_o3_properties() {
        let c = scen_a();
        let v = 1.023928 * c.c;
        let k = gammas(&c, v, 1.0);
        let s = solitary_wave_o3(&c, v, 1.0, None).unwrap();
        let a = k.separatrix_amplitude().unwrap();
        assert!((s.amplitude() - a).abs() < 1e-10 * a);
        assert!(first_integral_drift(&s, &k) < 1e-8);
        assert!(ode_residual_o3(&s, &k) < 1e-6);
        assert!(s.eta[0].abs() < 1e-7 && s.eta[s.eta.len() - 1].abs() < 1e-7);
        let n = s.eta.len();
        for i in 0..n / 2 {
            assert!((s.eta[i] - s.eta[n - 1 - i]).abs() < 1e-12);
        }
    }

    #[test]
    fn subcritical_rejected() {
        let c = scen_a();
        assert!(matches!(
            solitary_wave_o3(&c, 0.99 * c.c, 1.0, None),
            Err(Error::Subcritical { .. })
        ));
        let flat = HomogenizedCoefficients::compute(&PeriodicProfile::flat(1.0), 9.81).unwrap();
        assert!(matches!(
            solitary_wave_o3(&flat, 1.1 * flat.c, 1.0, None),
            Err(Error::FlatBottom)
        ));
    }

    #[test]
    fn periodic_wave_turning_points() {
        let c = scen_a();
        let v = 1.02 * c.c;
        let k = gammas(&c, v, 1.0);
        let umin = k.pot(k.well().unwrap());
        let e = 0.5 * umin;
        let p = periodic_wave_o3(&c, v, 1.0, e, 256).unwrap();
        let (a, b) = turning_points(&k, e).unwrap();
        assert!((k.pot(a) - e).abs() < 1e-10 * umin.abs());
        assert!((k.pot(b) - e).abs() < 1e-10 * umin.abs());
        assert!((p.amplitude() - b).abs() < 1e-8);
        assert!(first_integral_drift(&p, &k) < 1e-8 * umin.abs().max(1.0));
        assert!(matches!(
            periodic_wave_o3(&c, v, 1.0, 0.1, 64),
            Err(Error::EnergyOutOfBand { .. })
        ));
        assert!(matches!(
            periodic_wave_o3(&c, v, 1.0, -1e-300, 64),
            Err(Error::PeriodExceedsWindow { .. })
        ));
    }

    #[test]
    fn o5_converges() {
        let c = scen_a();
        let v = 1.02327 * c.c;
        let g = solitary_wave_o3(&c, v, 1.0, None).unwrap();
        let s = solitary_wave_o5(&c, v, 1.0, &g).unwrap();
        let k = gammas(&c, v, 1.0);
        let r = discrete_residual_o5(&s.eta, s.spacing(), &k);
        assert!(max_abs(&r) < 1e-10);
        assert!(s.amplitude() > 0.5 * g.amplitude());
    }

    #[test]
    fn o5_second_order_refinement() {
        let c = scen_a();
        let v = 1.023928 * c.c;
        let k = gammas(&c, v, 1.0);
        let base = XiWindow::default_for(&k).unwrap();
        // the finest level sits near the h^-4 rounding floor
        let res: Vec<f64> = [2.0, 1.0, 0.5]
            .iter()
            .map(|&f| {
                let w = XiWindow { spacing: base.spacing * f, ..base };
                let g = solitary_wave_o3(&c, v, 1.0, Some(w)).unwrap();
                continuous_residual_o5(&solitary_wave_o5(&c, v, 1.0, &g).unwrap(), &k)
            })
            .collect();
        for w in res.windows(2) {
            let ratio = w[0] / w[1];
            assert!((ratio - 4.0).abs() < 0.4, "ratio {ratio}");
        }
    }

    #[test]
    fn o5_flat_collapses() {
        let c = scen_a();
        let v = 1.02 * c.c;
        let g = solitary_wave_o3(&c, v, 1.0, None).unwrap();
        let flat = HomogenizedCoefficients::compute(&PeriodicProfile::flat(1.0), 9.81).unwrap();
        assert!(matches!(
            solitary_wave_o5(&flat, v, 1.0, &g),
            Err(Error::TrivialSolution { .. })
        ));
    }

    #[test]
    fn speed_round_trip_o3() {
        let c = scen_a();
        let v0 = 1.02 * c.c;
        let a = solitary_wave_o3(&c, v0, 1.0, None).unwrap().amplitude();
        let v = speed_for_amplitude(&c, 1.0, a, 3).unwrap();
        assert!(((v - v0) / v0).abs() < 1e-6);
        let v2 = speed_for_amplitude(&c, 1.0, 1.2 * a, 3).unwrap();
        assert!(v2 > v);
    }
}
