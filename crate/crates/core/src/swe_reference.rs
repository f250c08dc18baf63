//! Finite-volume solver for the shallow-water equations over variable bathymetry.
//!
//! Semi-discrete wave propagation: `eta` and `hu` are reconstructed piecewise linearly
//! with a slope limiter, each interface Riemann problem is split into f-waves (the flux
//! jump minus the bottom source `-g hbar (b_R - b_L)` in Roe eigenvectors), and the
//! in-cell flux difference is added as a total fluctuation. Time stepping is SSP-RK2.
//! Bathymetry is constant within each cell, so steps sit exactly on interfaces and still
//! water stays exactly at rest. Solid wall at `x = 0`, zero-gradient outflow at `x = L`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::unit_cell::PeriodicProfile;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Limiter {
    #[default]
    Minmod,
    /// Monotonized central.
    Mc,
    /// Zero slopes (first order in space).
    None,
}

impl Limiter {
    /// Limited slope from the backward and forward differences.
    #[inline]
    fn slope(self, a: f64, b: f64) -> f64 {
        if a * b <= 0.0 {
            return 0.0;
        }
        let s = a.signum();
        match self {
            Limiter::Minmod => s * a.abs().min(b.abs()),
            Limiter::Mc => s * (2.0 * a.abs()).min(2.0 * b.abs()).min(0.5 * (a + b).abs()),
            Limiter::None => 0.0,
        }
    }
}

/// Cell-averaged state on `[0, L]`.
#[derive(Clone, Debug, PartialEq)]
pub struct FvState {
    pub dx: f64,
    /// Surface elevation `h + b`.
    pub eta: Vec<f64>,
    pub hu: Vec<f64>,
    /// Bottom elevation.
    pub b: Vec<f64>,
    pub t: f64,
}

impl FvState {
    pub fn len(&self) -> usize {
        self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }

    pub fn x(&self) -> Vec<f64> {
        (0..self.len()).map(|i| (i as f64 + 0.5) * self.dx).collect()
    }

    pub fn h(&self) -> Vec<f64> {
        self.eta.iter().zip(&self.b).map(|(e, b)| e - b).collect()
    }

    /// `sum h dx`.
    pub fn mass(&self) -> f64 {
        self.eta.iter().zip(&self.b).map(|(e, b)| e - b).sum::<f64>() * self.dx
    }

    /// Lake at rest with surface `eta0`, bathymetry `b(x) = eta0 - H(x / delta)` sampled as
    /// exact cell averages. `cells_per_period` cells span one bathymetry period.
    pub fn at_rest(
        profile: &PeriodicProfile,
        delta: f64,
        eta0: f64,
        length: f64,
        cells_per_period: usize,
    ) -> Result<Self> {
        profile.validate()?;
        if !(delta > 0.0 && length > 0.0) {
            return Err(Error::InvalidArgument("delta and length must be positive".into()));
        }
        if cells_per_period < 2 {
            return Err(Error::InvalidArgument("need at least two cells per period".into()));
        }
        let dx = delta / cells_per_period as f64;
        let n = (length / dx).round() as usize;
        let avg = cell_averages(profile, cells_per_period);
        let b: Vec<f64> = (0..n).map(|i| eta0 - avg[i % cells_per_period]).collect();
        Ok(FvState {
            dx,
            eta: vec![eta0; n],
            hu: vec![0.0; n],
            b,
            t: 0.0,
        })
    }

    /// Add `f(x)` to the surface (cell-centre sampling).
    pub fn perturb(&mut self, f: impl Fn(f64) -> f64) {
        for i in 0..self.len() {
            self.eta[i] += f((i as f64 + 0.5) * self.dx);
        }
    }
}

/// Exact averages of `H` over `n` equal sub-cells of the unit cell.
fn cell_averages(profile: &PeriodicProfile, n: usize) -> Vec<f64> {
    match profile {
        PeriodicProfile::PiecewiseConstant { breakpoints, values } => (0..n)
            .map(|i| {
                let (y0, y1) = (i as f64 / n as f64, (i + 1) as f64 / n as f64);
                let mut lo = 0.0f64;
                let mut s = 0.0;
                for (&hi, &v) in breakpoints.iter().zip(values) {
                    s += (hi.min(y1) - lo.max(y0)).max(0.0) * v;
                    lo = hi;
                }
                s * n as f64
            })
            .collect(),
        _ => {
            // composite Gauss-Legendre per sub-cell
            const X: [f64; 4] = [-0.861136311594053, -0.339981043584856, 0.339981043584856, 0.861136311594053];
            const W: [f64; 4] = [0.347854845137454, 0.652145154862546, 0.652145154862546, 0.347854845137454];
            let sub = 8;
            (0..n)
                .map(|i| {
                    let w = 1.0 / (n * sub) as f64;
                    let mut s = 0.0;
                    for k in 0..sub {
                        let c = (i * sub + k) as f64 * w + 0.5 * w;
                        for (x, wt) in X.iter().zip(&W) {
                            s += 0.5 * wt * profile.eval(c + 0.5 * w * x);
                        }
                    }
                    s / sub as f64
                })
                .collect()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FvConfig {
    pub g: f64,
    /// Courant number; SSP-RK2 with a limited reconstruction keeps its bounds only up to 0.5.
    pub cfl: f64,
    #[serde(default)]
    pub limiter: Limiter,
}

impl Default for FvConfig {
    fn default() -> Self {
        FvConfig {
            g: 9.81,
            cfl: 0.45,
            limiter: Limiter::Minmod,
        }
    }
}

/// Fluctuations `(A^- dQ, A^+ dQ)` of the interface Riemann problem, as `[eta, hu]` pairs.
///
/// Still water on both sides gives exactly zero.
#[inline]
fn fluctuations(g: f64, l: (f64, f64, f64), r: (f64, f64, f64)) -> ([f64; 2], [f64; 2]) {
    // (eta, hu, b)
    let (hl, hr) = (l.0 - l.2, r.0 - r.2);
    let (ul, ur) = (l.1 / hl, r.1 / hr);
    let (sl, sr) = (hl.sqrt(), hr.sqrt());
    let ubar = (sl * ul + sr * ur) / (sl + sr);
    let hbar = 0.5 * (hl + hr);
    let cbar = (g * hbar).sqrt();
    let s1 = ubar - cbar;
    let s2 = ubar + cbar;
    let d1 = r.1 - l.1;
    // momentum flux jump with -g hbar db folded in: g hbar (eta_R - eta_L)
    let d2 = (r.1 * ur - l.1 * ul) + g * hbar * (r.0 - l.0);
    let inv = 1.0 / (s2 - s1);
    let b1 = (s2 * d1 - d2) * inv;
    let b2 = (d2 - s1 * d1) * inv;
    let z1 = [b1, b1 * s1];
    let z2 = [b2, b2 * s2];
    let mut am = [0.0; 2];
    let mut ap = [0.0; 2];
    for (z, sp) in [(z1, s1), (z2, s2)] {
        let dst = if sp < 0.0 { &mut am } else { &mut ap };
        dst[0] += z[0];
        dst[1] += z[1];
    }
    (am, ap)
}

/// Extra cells updated past the last non-quiescent one: two RHS evaluations, each
/// reaching two cells.
const MARGIN: usize = 5;

/// Finite-volume integrator holding scratch storage.
#[derive(Clone, Debug)]
pub struct FvSolver {
    pub config: FvConfig,
    /// Largest still-water wave speed anywhere; bounds the rest region.
    rest_speed: f64,
    /// Cells at and beyond this index are exactly at rest.
    active_end: usize,
    eta_rest: f64,
    stage_eta: Vec<f64>,
    stage_hu: Vec<f64>,
    d_eta: Vec<f64>,
    d_hu: Vec<f64>,
    /// Mass that left through the outflow boundary.
    pub outflow_mass: f64,
    pub steps: usize,
    /// Skip the quiescent tail (results are bitwise identical either way).
    pub skip_quiet: bool,
}

impl FvSolver {
    /// `eta_rest` is the undisturbed surface level used to detect the quiescent region.
    pub fn new(config: FvConfig, state: &FvState, eta_rest: f64) -> Result<Self> {
        if !(config.cfl > 0.0 && config.cfl < 1.0) {
            return Err(Error::InvalidArgument(format!("cfl must lie in (0, 1), got {}", config.cfl)));
        }
        if !(config.g > 0.0) {
            return Err(Error::NonPositiveGravity(config.g));
        }
        check_depth(state)?;
        let n = state.len();
        let rest_speed = state
            .b
            .iter()
            .map(|&b| (config.g * (eta_rest - b).max(0.0)).sqrt())
            .fold(0.0, f64::max);
        let mut s = FvSolver {
            config,
            rest_speed,
            active_end: n,
            eta_rest,
            stage_eta: state.eta.clone(),
            stage_hu: state.hu.clone(),
            d_eta: vec![0.0; n],
            d_hu: vec![0.0; n],
            outflow_mass: 0.0,
            steps: 0,
            skip_quiet: true,
        };
        s.active_end = s.quiet_below(state, n);
        Ok(s)
    }

    /// Smallest `end <= from` such that cells `end..from` are exactly at rest.
    fn quiet_below(&self, st: &FvState, from: usize) -> usize {
        let mut end = from;
        while end > 0 && st.eta[end - 1] == self.eta_rest && st.hu[end - 1] == 0.0 {
            end -= 1;
        }
        end
    }

    fn work_end(&self, n: usize) -> usize {
        if self.skip_quiet {
            (self.active_end + MARGIN).min(n)
        } else {
            n
        }
    }

    /// Stable step `cfl dx / max(|u| + sqrt(g h))`.
    pub fn stable_dt(&self, st: &FvState) -> f64 {
        let g = self.config.g;
        let mut smax = self.rest_speed;
        for i in 0..self.work_end(st.len()) {
            let h = st.eta[i] - st.b[i];
            smax = smax.max((st.hu[i] / h).abs() + (g * h).sqrt());
        }
        self.config.cfl * st.dx / smax
    }

    /// One SSP-RK2 step of size `dt`.
    pub fn step_dt(&mut self, st: &mut FvState, dt: f64) -> Result<()> {
        let n = st.len();
        // cells 0..work are updated; the rest are at rest and provably unchanged
        let work = self.work_end(n);
        let (g, lim, dx) = (self.config.g, self.config.limiter, st.dx);
        let x_of = |i: usize| (i as f64 + 0.5) * dx;
        let f0 = rhs(g, lim, dx, &st.eta, &st.hu, &st.b, work, &mut self.d_eta, &mut self.d_hu)
            .map_err(|(i, h)| Error::DryCell { x: x_of(i), h })?;
        let hi = (work + 2).min(n);
        self.stage_eta[work..hi].copy_from_slice(&st.eta[work..hi]);
        self.stage_hu[work..hi].copy_from_slice(&st.hu[work..hi]);
        for i in 0..work {
            self.stage_eta[i] = st.eta[i] + dt * self.d_eta[i];
            self.stage_hu[i] = st.hu[i] + dt * self.d_hu[i];
        }
        let f1 = rhs(g, lim, dx, &self.stage_eta, &self.stage_hu, &st.b, work, &mut self.d_eta, &mut self.d_hu)
            .map_err(|(i, h)| Error::DryCell { x: x_of(i), h })?;
        for i in 0..work {
            st.eta[i] = 0.5 * st.eta[i] + 0.5 * (self.stage_eta[i] + dt * self.d_eta[i]);
            st.hu[i] = 0.5 * st.hu[i] + 0.5 * (self.stage_hu[i] + dt * self.d_hu[i]);
        }
        self.outflow_mass += 0.5 * dt * (f0 + f1);
        st.t += dt;
        self.steps += 1;
        if !st.eta[..work].iter().chain(&st.hu[..work]).all(|v| v.is_finite()) {
            return Err(Error::NonFinite { t: st.t });
        }
        self.active_end = self.quiet_below(st, work);
        Ok(())
    }

    /// One step at the stable time step; returns the step taken.
    pub fn fv_step(&mut self, st: &mut FvState) -> Result<f64> {
        let dt = self.stable_dt(st);
        self.step_dt(st, dt)?;
        Ok(dt)
    }

    /// Advance to exactly `t_end`.
    pub fn advance(&mut self, st: &mut FvState, t_end: f64) -> Result<()> {
        while st.t < t_end {
            let dt = self.stable_dt(st);
            let rem = t_end - st.t;
            if rem <= 1e-14 * t_end.abs().max(1.0) {
                st.t = t_end;
                break;
            }
            if dt >= rem {
                self.step_dt(st, rem)?;
                st.t = t_end;
            } else {
                self.step_dt(st, dt)?;
            }
        }
        Ok(())
    }
}

/// Semi-discrete right-hand side on cells `0..work`; returns the mass flux through the
/// right boundary (zero unless `work` reaches it). A dry edge yields `Err((cell, h))`.
#[allow(clippy::too_many_arguments)]
fn rhs(
    g: f64,
    lim: Limiter,
    dx: f64,
    eta: &[f64],
    hu: &[f64],
    b: &[f64],
    work: usize,
    d_eta: &mut [f64],
    d_hu: &mut [f64],
) -> std::result::Result<f64, (usize, f64)> {
    let n = eta.len();
    // reflecting ghost at the wall, copy at the outflow
    let at = |i: isize| -> (f64, f64) {
        if i < 0 {
            let m = (-i - 1) as usize;
            (eta[m], -hu[m])
        } else {
            let i = (i as usize).min(n - 1);
            (eta[i], hu[i])
        }
    };
    // edge values (eta_L, hu_L, eta_R, hu_R) of cell i
    let edges = |i: usize| -> (f64, f64, f64, f64) {
        let (em, qm) = at(i as isize - 1);
        let (e0, q0) = (eta[i], hu[i]);
        let (ep, qp) = if i + 1 < n { (eta[i + 1], hu[i + 1]) } else { (e0, q0) };
        let se = 0.5 * lim.slope(e0 - em, ep - e0);
        let sq = 0.5 * lim.slope(q0 - qm, qp - q0);
        (e0 - se, q0 - sq, e0 + se, q0 + sq)
    };
    let inv = 1.0 / dx;
    let mut prev = edges(0);
    // wall: mirror of the left edge of cell 0
    let (_, mut left_ap) = fluctuations(g, (prev.0, -prev.1, b[0]), (prev.0, prev.1, b[0]));
    let mut boundary_flux = 0.0;
    for i in 0..work {
        let (el, ql, er, qr) = prev;
        let h_l = el - b[i];
        let h_r = er - b[i];
        if !(h_l > 0.0 && h_r > 0.0) {
            return Err((i, h_l.min(h_r)));
        }
        let (am, ap, next) = if i + 1 < n {
            let nx = edges(i + 1);
            let (am, ap) = fluctuations(g, (er, qr, b[i]), (nx.0, nx.1, b[i + 1]));
            (am, ap, nx)
        } else {
            // outflow: zero jump, flux leaves with the right edge state
            boundary_flux = qr;
            ([0.0; 2], [0.0; 2], prev)
        };
        // in-cell flux difference; b is constant so 0.5 g (h_R^2 - h_L^2) = g hbar (eta_R - eta_L)
        let inner0 = qr - ql;
        let inner1 = qr * qr / h_r - ql * ql / h_l + g * 0.5 * (h_l + h_r) * (er - el);
        d_eta[i] = -inv * (left_ap[0] + am[0] + inner0);
        d_hu[i] = -inv * (left_ap[1] + am[1] + inner1);
        left_ap = ap;
        prev = next;
    }
    Ok(boundary_flux)
}

fn check_depth(st: &FvState) -> Result<()> {
    for i in 0..st.len() {
        let h = st.eta[i] - st.b[i];
        if !(h > 0.0) {
            return Err(Error::DryCell {
                x: (i as f64 + 0.5) * st.dx,
                h,
            });
        }
    }
    Ok(())
}

/// Snapshot of a reference run.
#[derive(Clone, Debug, PartialEq)]
pub struct FvSnapshot {
    pub t: f64,
    pub x: Vec<f64>,
    pub h: Vec<f64>,
    pub hu: Vec<f64>,
    pub eta: Vec<f64>,
}

impl FvSnapshot {
    pub fn of(st: &FvState) -> Self {
        FvSnapshot {
            t: st.t,
            x: st.x(),
            h: st.h(),
            hu: st.hu.clone(),
            eta: st.eta.clone(),
        }
    }
}

/// Output of [`run_reference`].
#[derive(Clone, Debug)]
pub struct FvRun {
    pub snapshots: Vec<FvSnapshot>,
    pub steps: usize,
    pub wall_seconds: f64,
    /// `|mass(t) - mass(0) + outflow| / mass(0)` at the final time.
    pub mass_defect: f64,
}

/// Run from `state` and record snapshots at the given increasing times.
pub fn run_reference(config: FvConfig, mut state: FvState, eta_rest: f64, t_out: &[f64]) -> Result<FvRun> {
    if t_out.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("output times must be increasing".into()));
    }
    let started = std::time::Instant::now();
    let mut solver = FvSolver::new(config, &state, eta_rest)?;
    let m0 = state.mass();
    let mut snapshots = Vec::with_capacity(t_out.len());
    for &t in t_out {
        solver.advance(&mut state, t)?;
        snapshots.push(FvSnapshot::of(&state));
    }
    Ok(FvRun {
        snapshots,
        steps: solver.steps,
        wall_seconds: started.elapsed().as_secs_f64(),
        mass_defect: (state.mass() - m0 + solver.outflow_mass).abs() / m0,
    })
}

/// Running mean over one bathymetry period (`p` cells), trapezoidal end weights.
pub fn period_average(v: &[f64], p: usize) -> Vec<f64> {
    let n = v.len();
    if p <= 1 || n == 0 {
        return v.to_vec();
    }
    let half = p / 2;
    let at = |i: isize| -> f64 { v[i.clamp(0, n as isize - 1) as usize] };
    (0..n as isize)
        .map(|i| {
            if p % 2 == 0 {
                let mut s = 0.5 * (at(i - half as isize) + at(i + half as isize));
                for k in -(half as isize) + 1..half as isize {
                    s += at(i + k);
                }
                s / p as f64
            } else {
                let mut s = 0.0;
                for k in -(half as isize)..=half as isize {
                    s += at(i + k);
                }
                s / p as f64
            }
        })
        .collect()
}

/// Leading solitary wave tracked over a sequence of snapshots.
#[derive(Clone, Debug, PartialEq)]
pub struct SolitaryTrack {
    pub times: Vec<f64>,
    pub crest_x: Vec<f64>,
    pub crest_eta: Vec<f64>,
    /// Mean crest height over the tracked snapshots.
    pub amplitude: f64,
    /// Least-squares slope of crest position against time.
    pub speed: f64,
    /// `(t - tau, eta(x_probe, t))` with `tau` the fitted passage time at `x_probe`.
    pub trace: Vec<(f64, f64)>,
}

/// Track the leading (rightmost significant) crest inside `window = (x_lo, x_hi)`.
///
/// `x`, `etas[k]` and `times[k]` describe the snapshots; `threshold` is the minimum
/// crest height relative to the tallest value in the window.
pub fn extract_solitary(
    x: &[f64],
    times: &[f64],
    etas: &[Vec<f64>],
    window: (f64, f64),
    threshold: f64,
    x_probe: Option<f64>,
) -> Result<SolitaryTrack> {
    if times.len() != etas.len() || times.is_empty() {
        return Err(Error::InvalidArgument("need one snapshot per time".into()));
    }
    let mut crest_x = Vec::new();
    let mut crest_eta = Vec::new();
    for (k, e) in etas.iter().enumerate() {
        let (xc, ec) = leading_crest(x, e, window, threshold)
            .ok_or_else(|| Error::NoCrest(format!("no separated crest at t = {}", times[k])))?;
        crest_x.push(xc);
        crest_eta.push(ec);
    }
    let n = times.len() as f64;
    let speed = if times.len() >= 2 {
        let tm = times.iter().sum::<f64>() / n;
        let xm = crest_x.iter().sum::<f64>() / n;
        let sxy: f64 = times.iter().zip(&crest_x).map(|(t, x)| (t - tm) * (x - xm)).sum();
        let sxx: f64 = times.iter().map(|t| (t - tm).powi(2)).sum();
        sxy / sxx
    } else {
        0.0
    };
    let amplitude = crest_eta.iter().sum::<f64>() / n;
    let trace = match x_probe {
        Some(xp) if speed > 0.0 => {
            let tm = times.iter().sum::<f64>() / n;
            let xm = crest_x.iter().sum::<f64>() / n;
            let tau = tm + (xp - xm) / speed;
            times
                .iter()
                .zip(etas)
                .map(|(&t, e)| (t - tau, interp(x, e, xp)))
                .collect()
        }
        _ => Vec::new(),
    };
    Ok(SolitaryTrack {
        times: times.to_vec(),
        crest_x,
        crest_eta,
        amplitude,
        speed,
        trace,
    })
}

fn interp(x: &[f64], v: &[f64], xp: f64) -> f64 {
    let n = x.len();
    if xp <= x[0] {
        return v[0];
    }
    if xp >= x[n - 1] {
        return v[n - 1];
    }
    let j = x.partition_point(|&xi| xi <= xp) - 1;
    let t = (xp - x[j]) / (x[j + 1] - x[j]);
    v[j] * (1.0 - t) + v[j + 1] * t
}

/// Rightmost local maximum above `threshold * max` in the window, refined by a parabola.
pub fn leading_crest(x: &[f64], e: &[f64], window: (f64, f64), threshold: f64) -> Option<(f64, f64)> {
    let idx: Vec<usize> = (1..x.len().saturating_sub(1))
        .filter(|&i| x[i] >= window.0 && x[i] <= window.1)
        .collect();
    let top = idx.iter().map(|&i| e[i]).fold(f64::NEG_INFINITY, f64::max);
    if !(top > 0.0) {
        return None;
    }
    let i = *idx
        .iter()
        .rev()
        .find(|&&i| e[i] >= threshold * top && e[i] >= e[i - 1] && e[i] >= e[i + 1])?;
    let (a, b, c) = (e[i - 1], e[i], e[i + 1]);
    let den = a - 2.0 * b + c;
    let s = if den != 0.0 { (0.5 * (a - c) / den).clamp(-0.5, 0.5) } else { 0.0 };
    let h = x[i + 1] - x[i];
    Some((x[i] + s * h, b - 0.25 * (a - c) * s))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lake_at_rest_two_layer() {
        let p = PeriodicProfile::two_layer(1.0, 0.3);
        let mut st = FvState::at_rest(&p, 1.0, 0.0, 8.0, 64).unwrap();
        let e0 = st.eta.clone();
        let mut s = FvSolver::new(FvConfig::default(), &st, 0.0).unwrap();
        s.skip_quiet = false;
        for _ in 0..1000 {
            s.fv_step(&mut st).unwrap();
        }
        let err = st.eta.iter().zip(&e0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let q = st.hu.iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!(err < 1e-14 && q < 1e-14, "{err} {q}");
        assert_eq!(st.eta, e0);
    }

    #[test]
    fn cell_averages_exact_two_layer() {
        let p = PeriodicProfile::two_layer(1.0, 0.3);
        let a = cell_averages(&p, 4);
        assert_eq!(a, vec![1.0, 1.0, 0.3, 0.3]);
        let a = cell_averages(&p, 3);
        assert!((a[1] - (0.5 * 1.0 + 0.5 * 0.3)).abs() < 1e-14);
    }

    #[test]
    fn fluctuations_vanish_for_still_water() {
        let (am, ap) = fluctuations(9.81, (0.1, 0.0, -1.0), (0.1, 0.0, -0.3));
        assert!(am.iter().chain(&ap).all(|&v| v == 0.0));
        // mass fluctuations sum to the discharge jump
        let (am, ap) = fluctuations(9.81, (0.2, 0.3, -1.0), (0.1, -0.1, -1.0));
        assert!((am[0] + ap[0] - (-0.1 - 0.3)).abs() < 1e-15);
    }

    #[test]
    fn wall_flux_is_zero() {
        let (_, ap) = fluctuations(9.81, (0.05, -0.2, -1.0), (0.05, 0.2, -1.0));
        // numerical mass flux at the wall: hu_L - (A^+ dQ)_0
        assert!((0.2 - ap[0]).abs() < 1e-15);
    }

    #[test]
    fn crest_refinement() {
        let x: Vec<f64> = (0..200).map(|i| i as f64 * 0.1).collect();
        let e: Vec<f64> = x
            .iter()
            .map(|&x| (-(x - 12.34f64).powi(2)).exp() + 0.5 * (-(x - 5.0f64).powi(2)).exp())
            .collect();
        let (xc, ec) = leading_crest(&x, &e, (0.0, 20.0), 0.2).unwrap();
        assert!((xc - 12.34).abs() < 2e-3 && (ec - 1.0).abs() < 1e-2);
    }

    #[test]
    fn period_average_of_constant() {
        let v = vec![2.0; 50];
        assert!(period_average(&v, 8).iter().all(|&a| (a - 2.0).abs() < 1e-15));
        let v: Vec<f64> = (0..64).map(|i| (2.0 * std::f64::consts::PI * i as f64 / 8.0).sin()).collect();
        let a = period_average(&v, 8);
        assert!(a[10..50].iter().all(|x| x.abs() < 1e-14));
    }
}
