//! Pseudo-spectral time integration of the homogenized equations in the mixed
//! (space-space-time) dispersive form.
//!
//! The state is `(eta, q)` on a periodic grid on `[-L, L)`. The momentum equation is
//! solved for `q_t` by dividing each Fourier mode by the elliptic symbol
//! `1 + delta^2 mu k^2 [+ delta^4 (nu1 + nu2 - mu^2) k^4]`.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coefficients::HomogenizedCoefficients;
use crate::error::{Error, Result};
use crate::rk::{Integrator, Stats, StepControl, Stepper, Tolerance};
use crate::spectral::{mode_index, wavenumbers, Transform};
use crate::unit_cell::{CellFunction, CellGrid, PeriodicProfile, PiecewisePolynomial, DEFAULT_CELL_POINTS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Dealias {
    Off,
    /// Zero modes with `|j| > M/3`.
    #[default]
    TwoThirds,
    /// Zero modes with `|j| > M/4`.
    Half,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeStepping {
    Fixed { dt: f64 },
    Adaptive { rtol: f64, atol: f64 },
}

impl Default for TimeStepping {
    fn default() -> Self {
        TimeStepping::Adaptive { rtol: 1e-8, atol: 1e-10 }
    }
}

impl TimeStepping {
    pub fn control(self) -> StepControl {
        match self {
            TimeStepping::Fixed { dt } => StepControl::Fixed(dt),
            TimeStepping::Adaptive { rtol, atol } => StepControl::Adaptive(Tolerance { rtol, atol }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub order: u8,
    pub delta: f64,
    #[serde(default)]
    pub dealias: Dealias,
    #[serde(default)]
    pub dt_control: TimeStepping,
    pub final_time: f64,
    /// Keep only `c^2 eta_x` in the momentum flux.
    #[serde(default)]
    pub linear_only: bool,
}

impl SolverConfig {
    pub fn new(order: u8, delta: f64, final_time: f64) -> Self {
        SolverConfig {
            order,
            delta,
            dealias: Dealias::default(),
            dt_control: TimeStepping::default(),
            final_time,
            linear_only: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(3..=5).contains(&self.order) {
            return Err(Error::InvalidArgument(format!("order must be 3, 4 or 5, got {}", self.order)));
        }
        if !(self.delta > 0.0) {
            return Err(Error::InvalidArgument(format!("delta must be positive, got {}", self.delta)));
        }
        if !(self.final_time > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "final time must be positive, got {}",
                self.final_time
            )));
        }
        match self.dt_control {
            TimeStepping::Fixed { dt } if !(dt > 0.0) => {
                Err(Error::InvalidArgument(format!("fixed dt must be positive, got {dt}")))
            }
            TimeStepping::Adaptive { rtol, atol } if !(rtol > 0.0 && atol >= 0.0) => {
                Err(Error::InvalidArgument("adaptive tolerances must be positive".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Averaged fields on the periodic grid `x_j = -L + 2 L j / M`.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldState {
    pub half_length: f64,
    pub x: Vec<f64>,
    pub eta: Vec<f64>,
    pub q: Vec<f64>,
    pub t: f64,
}

pub fn periodic_grid(half_length: f64, m: usize) -> Vec<f64> {
    let dx = 2.0 * half_length / m as f64;
    (0..m).map(|j| -half_length + j as f64 * dx).collect()
}

impl FieldState {
    pub fn new(half_length: f64, eta: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        let m = eta.len();
        if q.len() != m {
            return Err(Error::GridMismatch { left: m, right: q.len() });
        }
        if m < 16 || !m.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("point count must be a power of two >= 16, got {m}")));
        }
        if !(half_length > 0.0) {
            return Err(Error::InvalidArgument(format!("half length must be positive, got {half_length}")));
        }
        Ok(FieldState {
            half_length,
            x: periodic_grid(half_length, m),
            eta,
            q,
            t: 0.0,
        })
    }

    pub fn from_fn(half_length: f64, m: usize, eta: impl Fn(f64) -> f64, q: impl Fn(f64) -> f64) -> Result<Self> {
        let x = periodic_grid(half_length, m);
        Self::new(half_length, x.iter().map(|&v| eta(v)).collect(), x.iter().map(|&v| q(v)).collect())
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_length / self.len() as f64
    }

    /// Domain mean of `eta`.
    pub fn mass(&self) -> f64 {
        self.eta.iter().sum::<f64>() / self.len() as f64
    }

    pub fn is_finite(&self) -> bool {
        self.eta.iter().chain(&self.q).all(|v| v.is_finite())
    }

    const MAGIC: &'static [u8; 8] = b"SWHCKPT1";

    /// Binary checkpoint: magic, `M` (u64), `L`, `t`, then `eta` and `q`, all little-endian.
    pub fn write_checkpoint<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(Self::MAGIC)?;
        w.write_all(&(self.len() as u64).to_le_bytes())?;
        w.write_all(&self.half_length.to_le_bytes())?;
        w.write_all(&self.t.to_le_bytes())?;
        for v in self.eta.iter().chain(&self.q) {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_checkpoint<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != Self::MAGIC {
            return Err(Error::Config("not a checkpoint file".into()));
        }
        let mut b = [0u8; 8];
        let mut next = |r: &mut R| -> Result<[u8; 8]> {
            r.read_exact(&mut b)?;
            Ok(b)
        };
        let m = u64::from_le_bytes(next(&mut r)?) as usize;
        let half_length = f64::from_le_bytes(next(&mut r)?);
        let t = f64::from_le_bytes(next(&mut r)?);
        if m > 1 << 28 {
            return Err(Error::Config(format!("implausible checkpoint size {m}")));
        }
        let mut vals = Vec::with_capacity(2 * m);
        for _ in 0..2 * m {
            vals.push(f64::from_le_bytes(next(&mut r)?));
        }
        let q = vals.split_off(m);
        let mut s = FieldState::new(half_length, vals, q)?;
        s.t = t;
        Ok(s)
    }
}

/// Coefficient set actually used in the momentum flux.
#[derive(Clone, Copy, Debug)]
struct Flux {
    c2: f64,
    g: f64,
    d: f64,
    kappa2: f64,
    a: [f64; 10],
    beta: [f64; 14],
}

pub struct HomogenizedSolver {
    config: SolverConfig,
    flux: Flux,
    m: usize,
    half_length: f64,
    k: Vec<f64>,
    inv_symbol: Vec<f64>,
    mask: Vec<f64>,
    fft: Transform,
    spec: [Vec<Complex64>; 2],
    dspec: [Vec<Complex64>; 2],
    work: Vec<Complex64>,
    fields: Vec<Vec<f64>>,
    mom: Vec<f64>,
}

impl std::fmt::Debug for HomogenizedSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HomogenizedSolver")
            .field("config", &self.config)
            .field("m", &self.m)
            .field("half_length", &self.half_length)
            .finish()
    }
}

// field slots
const ETA: usize = 0;
const Q: usize = 1;
const ETA_X: usize = 2;
const Q_X: usize = 3;
const ETA_XX: usize = 4;
const Q_XX: usize = 5;
const ETA_XXX: usize = 6;
const Q_XXX: usize = 7;

/// Elliptic symbol at angular wavenumber `k`.
pub fn elliptic_symbol(coeffs: &HomogenizedCoefficients, delta: f64, order: u8, k: f64) -> f64 {
    let k2 = k * k;
    let mut s = 1.0 + delta * delta * coeffs.mu * k2;
    if order >= 5 {
        s += delta.powi(4) * coeffs.stability_margin() * k2 * k2;
    }
    s
}

impl HomogenizedSolver {
    pub fn new(coeffs: &HomogenizedCoefficients, config: SolverConfig, half_length: f64, m: usize) -> Result<Self> {
        config.validate()?;
        if m < 16 || !m.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("point count must be a power of two >= 16, got {m}")));
        }
        if !(half_length > 0.0) {
            return Err(Error::InvalidArgument(format!("half length must be positive, got {half_length}")));
        }
        let beta = if config.order >= 5 && !config.linear_only {
            coeffs.beta.ok_or(Error::NotTranslationEven)?
        } else {
            [0.0; 14]
        };
        let k = wavenumbers(m, 2.0 * half_length);
        let mut inv_symbol = Vec::with_capacity(m);
        for &kj in &k {
            let s = elliptic_symbol(coeffs, config.delta, config.order, kj);
            if !(s > 0.0) {
                return Err(Error::EllipticSymbol { k: kj, symbol: s });
            }
            inv_symbol.push(1.0 / s);
        }
        let cut = match config.dealias {
            Dealias::Off => f64::INFINITY,
            Dealias::TwoThirds => m as f64 / 3.0,
            Dealias::Half => m as f64 / 4.0,
        };
        let mask = (0..m)
            .map(|j| if mode_index(j, m).abs() <= cut { 1.0 } else { 0.0 })
            .collect();
        let zero = vec![Complex64::new(0.0, 0.0); m];
        let flux = Flux {
            c2: coeffs.c * coeffs.c,
            g: coeffs.g,
            d: config.delta,
            kappa2: coeffs.kappa2(),
            a: [
                0.0,
                coeffs.alpha1,
                coeffs.alpha2,
                coeffs.alpha3,
                coeffs.alpha4,
                coeffs.alpha5,
                coeffs.alpha6,
                coeffs.alpha7,
                coeffs.alpha8,
                coeffs.alpha9,
            ],
            beta,
        };
        Ok(HomogenizedSolver {
            config,
            flux,
            m,
            half_length,
            k,
            inv_symbol,
            mask,
            fft: Transform::new(m),
            spec: [zero.clone(), zero.clone()],
            dspec: [zero.clone(), zero.clone()],
            work: zero,
            fields: vec![vec![0.0; m]; 8],
            mom: vec![0.0; m],
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn grid(&self) -> Vec<f64> {
        periodic_grid(self.half_length, self.m)
    }

    fn highest_derivative(&self) -> u32 {
        if self.config.linear_only || self.config.order == 3 {
            1
        } else {
            3
        }
    }

    /// Spectral derivatives of `(eta, q)` into the field slots.
    fn derivatives(&mut self, eta: &[f64], q: &[f64]) {
        let [se, sq] = &mut self.spec;
        self.fft.forward_pair(eta, q, se, sq, &mut self.work);
        for j in 0..self.m {
            se[j] *= self.mask[j];
            sq[j] *= self.mask[j];
        }
        let top = self.highest_derivative();
        let i = Complex64::new(0.0, 1.0);
        for d in 0..=top {
            let [de, dq] = &mut self.dspec;
            for j in 0..self.m {
                let f = (i * self.k[j]).powu(d);
                de[j] = self.spec[0][j] * f;
                dq[j] = self.spec[1][j] * f;
            }
            let (a, b) = (2 * d as usize, 2 * d as usize + 1);
            let (lo, hi) = self.fields.split_at_mut(b);
            self.fft.inverse_pair(&self.dspec[0], &self.dspec[1], &mut lo[a], &mut hi[0], &mut self.work);
        }
    }

    /// Momentum flux (before elliptic inversion) from the field slots.
    fn assemble_momentum(&mut self) {
        let fl = self.flux;
        let f = &self.fields;
        let order = self.config.order;
        let lin = self.config.linear_only;
        let (d, d2) = (fl.d, fl.d * fl.d);
        let (d3, d4) = (d2 * d, d2 * d2);
        let (c2, g, a, b) = (fl.c2, fl.g, fl.a, fl.beta);
        for j in 0..self.m {
            let (e, qv, ex, qx) = (f[ETA][j], f[Q][j], f[ETA_X][j], f[Q_X][j]);
            let mut m = c2 * ex;
            if !lin {
                m += d * fl.kappa2 * (c2 * e * ex + 2.0 * qv * qx);
                m += d2 * (a[1] * qv * e * qx + a[2] * qv * qv * ex + g * a[3] * e * e * ex);
                if order >= 4 {
                    let (exx, qxx, exxx, qxxx) = (f[ETA_XX][j], f[Q_XX][j], f[ETA_XXX][j], f[Q_XXX][j]);
                    let (e2, q2) = (e * e, qv * qv);
                    m += d3
                        * (a[4] / g * q2 * qv * qx
                            + a[5] * e2 * qv * qx
                            + a[6] * q2 * e * ex
                            + g * a[7] * e2 * e * ex
                            + a[8] * (2.0 * qx * qxx + c2 * e * exxx)
                            + a[9] * (5.0 * c2 * ex * exx + 2.0 * qv * qxxx));
                    if order >= 5 {
                        m += d4
                            * (b[0] * q2 * q2 * ex
                                + b[1] * e2 * e2 * ex
                                + b[2] * e2 * q2 * ex
                                + b[3] * e * q2 * qv * qx
                                + b[4] * ex * ex * ex
                                + b[5] * e * ex * exx
                                + b[6] * e2 * exxx
                                + b[7] * ex * qv * qxx
                                + b[8] * qv * e2 * e * qx
                                + b[9] * exx * qv * qx
                                + b[10] * ex * qx * qx
                                + b[11] * q2 * exxx
                                + b[12] * e * qx * qxx
                                + b[13] * e * qv * qxxx);
                    }
                }
            }
            self.mom[j] = m;
        }
    }

    /// Momentum flux `F` such that `(1 - delta^2 mu d_xx [...]) q_t = -F`.
    pub fn momentum(&mut self, eta: &[f64], q: &[f64]) -> Vec<f64> {
        self.derivatives(eta, q);
        self.assemble_momentum();
        self.mom.clone()
    }

    /// Divide each mode of `v` by the elliptic symbol (and apply the dealiasing mask).
    pub fn apply_inverse_elliptic(&mut self, v: &mut [f64]) {
        for (w, &x) in self.work.iter_mut().zip(v.iter()) {
            *w = Complex64::new(x, 0.0);
        }
        self.fft.forward_inplace(&mut self.work);
        for j in 0..self.m {
            self.work[j] *= self.inv_symbol[j] * self.mask[j];
        }
        self.fft.inverse_inplace(&mut self.work);
        for (x, w) in v.iter_mut().zip(&self.work) {
            *x = w.re;
        }
    }

    /// Time derivatives `(eta_t, q_t)`.
    pub fn rhs(&mut self, eta: &[f64], q: &[f64], deta: &mut [f64], dq: &mut [f64]) {
        self.derivatives(eta, q);
        self.assemble_momentum();
        let mut mom = std::mem::take(&mut self.mom);
        self.apply_inverse_elliptic(&mut mom);
        for j in 0..self.m {
            dq[j] = -mom[j];
            deta[j] = -self.fields[Q_X][j];
        }
        self.mom = mom;
    }

    fn system(&mut self) -> impl FnMut(f64, &[f64], &mut [f64]) -> Result<()> + '_ {
        let m = self.m;
        move |_t, y, dy| {
            let (e, q) = y.split_at(m);
            let (de, dq) = dy.split_at_mut(m);
            self.rhs(e, q, de, dq);
            Ok(())
        }
    }

    fn check_state(&self, s: &FieldState) -> Result<()> {
        if s.len() != self.m {
            return Err(Error::GridMismatch { left: self.m, right: s.len() });
        }
        if (s.half_length - self.half_length).abs() > 1e-12 * self.half_length {
            return Err(Error::InvalidArgument("state domain differs from solver domain".into()));
        }
        Ok(())
    }

    /// One explicit Runge-Kutta step of size `dt`.
    pub fn step(&mut self, state: &FieldState, dt: f64) -> Result<FieldState> {
        self.check_state(state)?;
        let m = self.m;
        let mut y = [state.eta.as_slice(), state.q.as_slice()].concat();
        let mut out = vec![0.0; 2 * m];
        let mut st = Stepper::new(2 * m);
        let t = state.t;
        st.try_step(&mut self.system(), t, &y, dt, &mut out, None)?;
        if !out.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite { t: t + dt });
        }
        y.copy_from_slice(&out);
        let q = y.split_off(m);
        Ok(FieldState {
            half_length: self.half_length,
            x: state.x.clone(),
            eta: y,
            q,
            t: t + dt,
        })
    }

    /// Integrate from `initial` and return snapshots at each output time
    /// (times not exceeding the configured final time).
    pub fn simulate(&mut self, initial: &FieldState, output_times: &[f64]) -> Result<Simulation> {
        self.check_state(initial)?;
        if output_times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("output times must be increasing".into()));
        }
        let m = self.m;
        let mut y = [initial.eta.as_slice(), initial.q.as_slice()].concat();
        let mut t = initial.t;
        let mut it = Integrator::new(2 * m, self.config.dt_control.control());
        let mass0 = initial.mass();
        let scale = initial.eta.iter().map(|v| v.abs()).sum::<f64>() / m as f64;
        let final_time = self.config.final_time;
        let x = initial.x.clone();
        let mut snapshots = Vec::new();
        let mut max_mass_drift = 0.0f64;
        let started = std::time::Instant::now();
        for &to in output_times.iter().filter(|&&to| to <= final_time * (1.0 + 1e-12)) {
            it.advance(&mut self.system(), &mut t, &mut y, to)?;
            let (e, q) = y.split_at(m);
            let snap = FieldState {
                half_length: self.half_length,
                x: x.clone(),
                eta: e.to_vec(),
                q: q.to_vec(),
                t,
            };
            if !snap.is_finite() {
                return Err(Error::NonFinite { t });
            }
            let drift = (snap.mass() - mass0).abs() / scale.max(f64::MIN_POSITIVE);
            max_mass_drift = max_mass_drift.max(drift);
            snapshots.push(snap);
        }
        Ok(Simulation {
            snapshots,
            stats: it.stats,
            rhs_evals: it.stepper.evals,
            max_mass_drift,
            wall_seconds: started.elapsed().as_secs_f64(),
        })
    }

    /// Surface elevation including the fast-scale corrections, on a grid refined by `factor`.
    ///
    /// Time derivatives of `q` are taken from the momentum equation.
    pub fn fast_scale_reconstruction(
        &mut self,
        state: &FieldState,
        profile: &PeriodicProfile,
        factor: usize,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_state(state)?;
        if factor == 0 || !factor.is_power_of_two() {
            return Err(Error::InvalidArgument(format!("refinement factor must be a power of two, got {factor}")));
        }
        let m = self.m;
        let mut deta = vec![0.0; m];
        let mut qt = vec![0.0; m];
        self.rhs(&state.eta, &state.q, &mut deta, &mut qt);
        let period = 2.0 * self.half_length;
        let qtx = crate::spectral::derivative(&qt, period, 1);
        let qx = crate::spectral::derivative(&state.q, period, 1);
        let up = |v: &[f64]| crate::spectral::upsample(v, factor);
        let (eta, q, qt, qtx, qx) = (up(&state.eta), up(&state.q), up(&qt), up(&qtx), up(&qx));
        let cells = FastScaleTable::new(profile)?;
        let x = periodic_grid(self.half_length, m * factor);
        let d = self.config.delta;
        let g = self.flux.g;
        let out = (0..m * factor)
            .map(|j| {
                let y = (x[j] / d).rem_euclid(1.0);
                let v = cells.eval(y);
                eta[j]
                    + (-d * v.b1 * qt[j] - 0.5 * v.f2 * q[j] * q[j] + d * d * v.bb1 * qtx[j]
                        - d * v.b2 * q[j] * qx[j]
                        + d * v.b2 * eta[j] * qt[j]
                        + v.f3 * eta[j] * q[j] * q[j])
                        / g
            })
            .collect();
        Ok((x, out))
    }
}

/// Output of [`HomogenizedSolver::simulate`].
#[derive(Clone, Debug)]
pub struct Simulation {
    pub snapshots: Vec<FieldState>,
    pub stats: Stats,
    pub rhs_evals: usize,
    /// Largest `|<eta>(t) - <eta>(0)|` relative to the initial mean of `|eta|`.
    pub max_mass_drift: f64,
    pub wall_seconds: f64,
}

struct CellValues {
    b1: f64,
    bb1: f64,
    f2: f64,
    b2: f64,
    f3: f64,
}

enum Carrier {
    Exact(PiecewisePolynomial),
    Grid(CellGrid),
}

impl Carrier {
    fn eval(&self, y: f64) -> f64 {
        match self {
            Carrier::Exact(p) => p.eval(y),
            Carrier::Grid(g) => g.eval(y),
        }
    }
}

/// Unit-cell functions entering the fast-scale corrections.
struct FastScaleTable {
    b1: Carrier,
    bb1: Carrier,
    f2: Carrier,
    b2: Carrier,
    f3: Carrier,
}

impl FastScaleTable {
    fn new(profile: &PeriodicProfile) -> Result<Self> {
        fn build<T: CellFunction>(inv: impl Fn(u32) -> T, wrap: impl Fn(T) -> Carrier) -> Result<FastScaleTable> {
            let h1 = inv(1);
            let h2 = inv(2);
            Ok(FastScaleTable {
                b1: wrap(h1.bracket()),
                bb1: wrap(h1.nested_bracket(2)?),
                f2: wrap(h2.fluctuation()),
                b2: wrap(h2.bracket()),
                f3: wrap(inv(3).fluctuation()),
            })
        }
        profile.validate()?;
        if profile.power_exact(-1).is_some() {
            build(
                |k| profile.inverse_power_exact(k).expect("piecewise-constant"),
                Carrier::Exact,
            )
        } else {
            let h = profile.grid(DEFAULT_CELL_POINTS)?;
            build(|k| h.powi(-(k as i32)), Carrier::Grid)
        }
    }

    fn eval(&self, y: f64) -> CellValues {
        CellValues {
            b1: self.b1.eval(y),
            bb1: self.bb1.eval(y),
            f2: self.f2.eval(y),
            b2: self.b2.eval(y),
            f3: self.f3.eval(y),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn scen_a() -> HomogenizedCoefficients {
        HomogenizedCoefficients::compute(&PeriodicProfile::two_layer(1.0, 0.3), 9.81).unwrap()
    }

    #[test]
    fn rest_state_is_steady() {
        let c = scen_a();
        for order in 3..=5 {
            let mut s = HomogenizedSolver::new(&c, SolverConfig::new(order, 1.0, 1.0), 10.0, 64).unwrap();
            let z = vec![0.0; 64];
            let (mut a, mut b) = (vec![1.0; 64], vec![1.0; 64]);
            s.rhs(&z, &z, &mut a, &mut b);
            assert!(a.iter().chain(&b).all(|&v| v == 0.0));
        }
    }

    #[test]
    fn linear_term_isolated() {
        let c = scen_a();
        let mut s = HomogenizedSolver::new(&c, SolverConfig::new(3, 1.0, 1.0), PI, 64).unwrap();
        let x = s.grid();
        let eps = 1e-6;
        let k = 3.0;
        let eta: Vec<f64> = x.iter().map(|&x| eps * (k * x).cos()).collect();
        let mom = s.momentum(&eta, &vec![0.0; 64]);
        for (j, &xv) in x.iter().enumerate() {
            let lin = -c.c * c.c * eps * k * (k * xv).sin();
            assert!((mom[j] - lin).abs() < 1e-3 * eps);
        }
    }

    #[test]
    fn inverse_elliptic_single_mode() {
        let c = scen_a();
        let mut s = HomogenizedSolver::new(&c, SolverConfig::new(3, 1.0, 1.0), PI, 64).unwrap();
        let x = s.grid();
        let mut v: Vec<f64> = x.iter().map(|&x| (5.0 * x).sin()).collect();
        s.apply_inverse_elliptic(&mut v);
        let f = 1.0 / (1.0 + c.mu * 25.0);
        for (j, &xv) in x.iter().enumerate() {
            assert!((v[j] - f * (5.0 * xv).sin()).abs() < 1e-14);
        }
        let flat = HomogenizedCoefficients::compute(&PeriodicProfile::flat(1.0), 9.81).unwrap();
        let mut s = HomogenizedSolver::new(&flat, SolverConfig::new(3, 1.0, 1.0), PI, 64).unwrap();
        let mut w: Vec<f64> = x.iter().map(|&x| (5.0 * x).sin()).collect();
        let w0 = w.clone();
        s.apply_inverse_elliptic(&mut w);
        assert!(w.iter().zip(&w0).all(|(a, b)| (a - b).abs() < 1e-14));
    }

    #[test]
    fn order5_symbol_matches_dispersion() {
        let c = scen_a();
        for &k in &[0.5, 2.0, 10.0] {
            let w = crate::dispersion::omega_dimensional(&c, 1.0, k, true);
            let s = elliptic_symbol(&c, 1.0, 5, k);
            assert!((w * w * s - c.c * c.c * k * k).abs() < 1e-12 * w * w * s);
        }
    }

    #[test]
    fn order5_requires_even_profile() {
        let odd = PeriodicProfile::PiecewiseConstant {
            breakpoints: vec![0.2, 0.5, 1.0],
            values: vec![1.0, 0.5, 0.3],
        };
        let c = HomogenizedCoefficients::compute(&odd, 9.81).unwrap();
        if c.beta.is_none() {
            assert!(matches!(
                HomogenizedSolver::new(&c, SolverConfig::new(5, 1.0, 1.0), 10.0, 64),
                Err(Error::NotTranslationEven)
            ));
        }
    }

    #[test]
    fn checkpoint_round_trip() {
        let mut s = FieldState::from_fn(5.0, 32, |x| (-x * x).exp(), |x| x.sin()).unwrap();
        s.t = 1.25;
        let mut buf = Vec::new();
        s.write_checkpoint(&mut buf).unwrap();
        assert_eq!(buf.len(), 8 * 4 + 16 * 32);
        let r = FieldState::read_checkpoint(buf.as_slice()).unwrap();
        assert_eq!(r, s);
        assert!(FieldState::read_checkpoint(&b"garbage!"[..]).is_err());
    }

    #[test]
    fn flat_reconstruction_is_identity() {
        let flat = PeriodicProfile::flat(1.0);
        let c = HomogenizedCoefficients::compute(&flat, 9.81).unwrap();
        let mut s = HomogenizedSolver::new(&c, SolverConfig::new(3, 1.0, 1.0), 20.0, 256).unwrap();
        let st = FieldState::from_fn(20.0, 256, |x| 0.02 * (-x * x / 9.0).exp(), |x| 0.01 * (-x * x / 9.0).exp())
            .unwrap();
        let (_, r) = s.fast_scale_reconstruction(&st, &flat, 2).unwrap();
        let up = crate::spectral::upsample(&st.eta, 2);
        assert!(r.iter().zip(&up).all(|(a, b)| (a - b).abs() < 1e-15));
    }

    #[test]
    fn still_water_reconstruction_adds_nothing() {
        let p = PeriodicProfile::two_layer(1.0, 0.3);
        let c = scen_a();
        let mut s = HomogenizedSolver::new(&c, SolverConfig::new(5, 1.0, 1.0), 20.0, 256).unwrap();
        let st = FieldState::from_fn(20.0, 256, |_| 0.01, |_| 0.0).unwrap();
        let (_, r) = s.fast_scale_reconstruction(&st, &p, 4).unwrap();
        assert!(r.iter().all(|v| (v - 0.01).abs() < 1e-15));
    }
}
