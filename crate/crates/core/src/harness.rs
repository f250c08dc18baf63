//! Scenario configuration, orchestration of homogenized and reference runs, and
//! comparison metrics.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::coefficients::HomogenizedCoefficients;
use crate::error::{Error, Result};
use crate::homogenized_solver::{
    periodic_grid, Dealias, FieldState, HomogenizedSolver, Simulation, SolverConfig, TimeStepping,
};
use crate::swe_reference::{leading_crest, period_average, run_reference, FvConfig, FvRun, FvSnapshot, FvState};
use crate::traveling_wave::{solitary_wave_o3, solitary_wave_o5, TravelingWaveSolution};
use crate::unit_cell::PeriodicProfile;

fn default_g() -> f64 {
    9.81
}

fn default_name() -> String {
    "scenario".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    /// `amplitude * exp(-((x - center) / width)^2)` at rest.
    Gaussian {
        amplitude: f64,
        width: f64,
        #[serde(default)]
        center: f64,
    },
    /// Solitary wave of the given order moving right at `speed_ratio * c`, with `q = V eta`.
    TravelingWave {
        order: u8,
        speed_ratio: f64,
        #[serde(default)]
        center: f64,
    },
    /// Surface (and optionally `q`) samples, linearly interpolated; zero outside.
    Custom {
        x: Vec<f64>,
        eta: Vec<f64>,
        #[serde(default)]
        q: Option<Vec<f64>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    /// Homogenized grid covers `[-half_length, half_length)` periodically.
    pub half_length: f64,
    pub m: usize,
    /// Reference grid covers `[0, fv_length]` with a wall at 0.
    pub fv_length: f64,
    pub cells_per_period: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    #[serde(default)]
    pub dealias: Dealias,
    #[serde(default)]
    pub dt_control: TimeStepping,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub delta: f64,
    #[serde(default = "default_g")]
    pub g: f64,
    /// Still-water surface level; all reported surfaces are relative to it.
    #[serde(default)]
    pub eta0: f64,
    pub order: u8,
    /// Further homogenized orders run by `run_comparison`.
    #[serde(default)]
    pub compare_orders: Vec<u8>,
    pub output_times: Vec<f64>,
    /// Reference output times; defaults to `output_times`.
    #[serde(default)]
    pub fv_output_times: Option<Vec<f64>>,
    pub bathymetry: PeriodicProfile,
    pub initial_condition: InitialCondition,
    pub domain: Domain,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub reference: FvConfig,
}

fn increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0]) && v.first().map_or(true, |&t| t > 0.0)
}

impl ScenarioConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let c: ScenarioConfig = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let s = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_toml_str(&s)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.delta > 0.0) {
            return bad(format!("delta must be positive, got {}", self.delta));
        }
        if !(self.g > 0.0) {
            return Err(Error::NonPositiveGravity(self.g));
        }
        if self.output_times.is_empty() || !increasing(&self.output_times) {
            return bad("output_times must be positive and increasing".into());
        }
        if let Some(t) = &self.fv_output_times {
            if t.is_empty() || !increasing(t) {
                return bad("fv_output_times must be positive and increasing".into());
            }
        }
        for &o in std::iter::once(&self.order).chain(&self.compare_orders) {
            if !(3..=5).contains(&o) {
                return bad(format!("order must be 3, 4 or 5, got {o}"));
            }
        }
        let d = &self.domain;
        if !(d.half_length > 0.0 && d.fv_length > 0.0) || d.m < 4 {
            return bad("domain lengths must be positive and m >= 4".into());
        }
        if d.cells_per_period < 64 {
            return bad(format!("the reference needs at least 64 cells per period, got {}", d.cells_per_period));
        }
        match &self.initial_condition {
            InitialCondition::Gaussian { width, .. } if !(*width > 0.0) => bad("gaussian width must be positive".into()),
            InitialCondition::TravelingWave { order, speed_ratio, .. } => {
                if !(*order == 3 || *order == 5) {
                    bad(format!("traveling-wave order must be 3 or 5, got {order}"))
                } else if !(*speed_ratio > 1.0) {
                    bad(format!("speed_ratio must exceed 1, got {speed_ratio}"))
                } else {
                    Ok(())
                }
            }
            InitialCondition::Custom { x, eta, q } => {
                if x.len() < 2 || x.len() != eta.len() || q.as_ref().map_or(false, |q| q.len() != x.len()) {
                    bad("custom samples need matching lengths (at least 2)".into())
                } else if !increasing_any(x) {
                    bad("custom x must be increasing".into())
                } else {
                    Ok(())
                }
            }
            _ => self.bathymetry.validate(),
        }?;
        self.bathymetry.validate()
    }

    pub fn coefficients(&self) -> Result<HomogenizedCoefficients> {
        HomogenizedCoefficients::compute(&self.bathymetry, self.g)
    }

    pub fn latest_time(&self) -> f64 {
        *self.output_times.last().unwrap_or(&0.0)
    }

    pub fn fv_times(&self) -> &[f64] {
        self.fv_output_times.as_deref().unwrap_or(&self.output_times)
    }

    pub fn solver_config(&self, order: u8) -> SolverConfig {
        SolverConfig {
            order,
            delta: self.delta,
            dealias: self.solver.dealias,
            dt_control: self.solver.dt_control,
            final_time: self.latest_time(),
            linear_only: false,
        }
    }

    /// Initial surface deviation and discharge as functions of `x`.
    fn initial_fields(&self, coeffs: &HomogenizedCoefficients) -> Result<Box<dyn Fn(f64) -> (f64, f64)>> {
        Ok(match self.initial_condition.clone() {
            InitialCondition::Gaussian { amplitude, width, center } => {
                Box::new(move |x| (amplitude * (-((x - center) / width).powi(2)).exp(), 0.0))
            }
            InitialCondition::TravelingWave { order, speed_ratio, center } => {
                let v = speed_ratio * coeffs.c;
                let w3 = solitary_wave_o3(coeffs, v, self.delta, None)?;
                let w: TravelingWaveSolution = if order == 5 {
                    solitary_wave_o5(coeffs, v, self.delta, &w3)?
                } else {
                    w3
                };
                Box::new(move |x| {
                    let e = w.eval(x - center);
                    (e, v * e)
                })
            }
            InitialCondition::Custom { x, eta, q } => Box::new(move |xp| {
                if xp < x[0] || xp > x[x.len() - 1] {
                    return (0.0, 0.0);
                }
                let e = lerp(&x, &eta, xp);
                (e, q.as_ref().map_or(0.0, |q| lerp(&x, q, xp)))
            }),
        })
    }

    pub fn homogenized_initial(&self, coeffs: &HomogenizedCoefficients) -> Result<FieldState> {
        let f = self.initial_fields(coeffs)?;
        let x = periodic_grid(self.domain.half_length, self.domain.m);
        let (eta, q): (Vec<f64>, Vec<f64>) = x.iter().map(|&x| f(x)).unzip();
        FieldState::new(self.domain.half_length, eta, q)
    }

    pub fn fv_initial(&self, coeffs: &HomogenizedCoefficients) -> Result<FvState> {
        let f = self.initial_fields(coeffs)?;
        let mut st = FvState::at_rest(
            &self.bathymetry,
            self.delta,
            self.eta0,
            self.domain.fv_length,
            self.domain.cells_per_period,
        )?;
        for (i, x) in st.x().into_iter().enumerate() {
            let (e, q) = f(x);
            st.eta[i] += e;
            st.hu[i] = q;
        }
        Ok(st)
    }

    pub fn run_homogenized(&self, coeffs: &HomogenizedCoefficients, order: u8) -> Result<Simulation> {
        let init = self.homogenized_initial(coeffs)?;
        let mut s = HomogenizedSolver::new(coeffs, self.solver_config(order), self.domain.half_length, self.domain.m)?;
        s.simulate(&init, &self.output_times)
    }

    pub fn run_fv(&self, coeffs: &HomogenizedCoefficients) -> Result<FvRun> {
        let mut cfg = self.reference;
        cfg.g = self.g;
        run_reference(cfg, self.fv_initial(coeffs)?, self.eta0, self.fv_times())
    }
}

fn increasing_any(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

fn lerp(x: &[f64], v: &[f64], xp: f64) -> f64 {
    let j = x.partition_point(|&xi| xi <= xp).clamp(1, x.len() - 1) - 1;
    let t = (xp - x[j]) / (x[j + 1] - x[j]);
    v[j] * (1.0 - t) + v[j + 1] * t
}

/// Band-limited resampling of a periodic homogenized field at arbitrary points.
pub struct PeriodicSampler {
    x0: f64,
    dx: f64,
    period: f64,
    fine: Vec<f64>,
}

impl PeriodicSampler {
    /// Refines by `factor` spectrally, then interpolates linearly.
    pub fn new(state_x0: f64, period: f64, v: &[f64], factor: usize) -> Self {
        let fine = crate::spectral::upsample(v, factor);
        PeriodicSampler {
            x0: state_x0,
            dx: period / fine.len() as f64,
            period,
            fine,
        }
    }

    pub fn at(&self, x: f64) -> f64 {
        let n = self.fine.len();
        let s = (x - self.x0).rem_euclid(self.period) / self.dx;
        let j = (s.floor() as usize).min(n - 1);
        let t = s - j as f64;
        self.fine[j] * (1.0 - t) + self.fine[(j + 1) % n] * t
    }
}

/// Refinement used when sampling homogenized fields on the reference grid.
pub const SAMPLE_REFINEMENT: usize = 8;

/// Differences between a homogenized and a reference surface at one time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMetrics {
    pub t: f64,
    pub linf: f64,
    pub l2: f64,
    /// `linf` over the largest reference value.
    pub linf_rel: f64,
    pub crest_homogenized: Option<(f64, f64)>,
    pub crest_reference: Option<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderReport {
    pub order: u8,
    pub wall_seconds: f64,
    pub max_mass_drift: f64,
    pub snapshots: Vec<SnapshotMetrics>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub scenario: String,
    pub reference_wall_seconds: f64,
    pub reference_mass_defect: f64,
    pub orders: Vec<OrderReport>,
}

impl ComparisonReport {
    pub fn order(&self, order: u8) -> Option<&OrderReport> {
        self.orders.iter().find(|o| o.order == order)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}

/// Period-averaged reference surface relative to `eta0`.
pub fn averaged_reference(snap: &FvSnapshot, cells_per_period: usize, eta0: f64) -> Vec<f64> {
    let dev: Vec<f64> = snap.eta.iter().map(|e| e - eta0).collect();
    period_average(&dev, cells_per_period)
}

/// Compare a homogenized snapshot against the period-averaged reference on
/// `x in [0, min(L, L_fv)]`.
pub fn compare_snapshot(homog: &FieldState, fv: &FvSnapshot, cells_per_period: usize, eta0: f64) -> SnapshotMetrics {
    let refv = averaged_reference(fv, cells_per_period, eta0);
    let sampler = PeriodicSampler::new(-homog.half_length, 2.0 * homog.half_length, &homog.eta, SAMPLE_REFINEMENT);
    let x_hi = homog.half_length.min(fv.x[fv.x.len() - 1]);
    let dx = fv.x[1] - fv.x[0];
    let mut linf = 0.0f64;
    let mut l2 = 0.0;
    let mut scale = 0.0f64;
    let mut hom_on_fv = Vec::with_capacity(fv.x.len());
    for (i, &x) in fv.x.iter().enumerate() {
        if x > x_hi {
            break;
        }
        let h = sampler.at(x);
        hom_on_fv.push(h);
        let d = h - refv[i];
        linf = linf.max(d.abs());
        l2 += d * d * dx;
        scale = scale.max(refv[i].abs());
    }
    let xs = &fv.x[..hom_on_fv.len()];
    SnapshotMetrics {
        t: fv.t,
        linf,
        l2: l2.sqrt(),
        linf_rel: if scale > 0.0 { linf / scale } else { linf },
        crest_homogenized: leading_crest(xs, &hom_on_fv, (0.0, x_hi), 0.3),
        crest_reference: leading_crest(xs, &refv[..hom_on_fv.len()], (0.0, x_hi), 0.3),
    }
}

/// Build a report from finished runs, matching snapshots by time.
pub fn compare_runs(config: &ScenarioConfig, homogenized: &[(u8, &Simulation)], fv: &FvRun) -> ComparisonReport {
    let orders = homogenized
        .iter()
        .map(|&(order, sim)| OrderReport {
            order,
            wall_seconds: sim.wall_seconds,
            max_mass_drift: sim.max_mass_drift,
            snapshots: sim
                .snapshots
                .iter()
                .filter_map(|s| {
                    let f = fv.snapshots.iter().find(|f| (f.t - s.t).abs() <= 1e-9 * s.t.abs().max(1.0))?;
                    Some(compare_snapshot(s, f, config.domain.cells_per_period, config.eta0))
                })
                .collect(),
        })
        .collect();
    ComparisonReport {
        scenario: config.name.clone(),
        reference_wall_seconds: fv.wall_seconds,
        reference_mass_defect: fv.mass_defect,
        orders,
    }
}

/// Run the reference and every requested homogenized order, then compare.
pub fn run_comparison(config: &ScenarioConfig) -> Result<ComparisonReport> {
    config.validate()?;
    let coeffs = config.coefficients()?;
    let mut orders = vec![config.order];
    for &o in &config.compare_orders {
        if !orders.contains(&o) {
            orders.push(o);
        }
    }
    let sims = orders
        .iter()
        .map(|&o| config.run_homogenized(&coeffs, o).map(|s| (o, s)))
        .collect::<Result<Vec<_>>>()?;
    let fv = config.run_fv(&coeffs)?;
    let refs: Vec<(u8, &Simulation)> = sims.iter().map(|(o, s)| (*o, s)).collect();
    Ok(compare_runs(config, &refs, &fv))
}

/// 17 significant digits.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub const CSV_HEADER: &str = "t,x,eta_bar,q_bar";

/// Homogenized snapshots as CSV. Optional extra columns are per-snapshot arrays on the
/// same grid (`eta_reconstructed`, `eta_reference`); NaN values are written empty.
pub fn write_homogenized_csv<W: Write>(
    mut w: W,
    snaps: &[FieldState],
    reconstructed: Option<&[Vec<f64>]>,
    reference: Option<&[Vec<f64>]>,
) -> Result<()> {
    let mut header = CSV_HEADER.to_string();
    if reconstructed.is_some() {
        header.push_str(",eta_reconstructed");
    }
    if reference.is_some() {
        header.push_str(",eta_reference");
    }
    writeln!(w, "{header}")?;
    let cell = |v: f64| if v.is_nan() { String::new() } else { num(v) };
    for (k, s) in snaps.iter().enumerate() {
        for j in 0..s.len() {
            write!(w, "{},{},{},{}", num(s.t), num(s.x[j]), num(s.eta[j]), num(s.q[j]))?;
            if let Some(r) = reconstructed {
                write!(w, ",{}", cell(r[k][j]))?;
            }
            if let Some(r) = reference {
                write!(w, ",{}", cell(r[k][j]))?;
            }
            writeln!(w)?;
        }
    }
    Ok(())
}

/// Reference snapshots in the same schema: period-averaged `eta - eta0` and `hu` as the
/// averaged columns, raw `eta - eta0` as `eta_reference`.
pub fn write_reference_csv<W: Write>(mut w: W, snaps: &[FvSnapshot], cells_per_period: usize, eta0: f64) -> Result<()> {
    writeln!(w, "{CSV_HEADER},eta_reference")?;
    for s in snaps {
        let e = averaged_reference(s, cells_per_period, eta0);
        let q = period_average(&s.hu, cells_per_period);
        for i in 0..s.x.len() {
            writeln!(w, "{},{},{},{},{}", num(s.t), num(s.x[i]), num(e[i]), num(q[i]), num(s.eta[i] - eta0))?;
        }
    }
    Ok(())
}

/// Reference surface sampled on a homogenized grid (NaN outside `[0, L_fv]`).
pub fn reference_on_grid(x: &[f64], snap: &FvSnapshot, eta0: f64) -> Vec<f64> {
    let (lo, hi) = (snap.x[0], snap.x[snap.x.len() - 1]);
    x.iter()
        .map(|&xp| if xp < lo || xp > hi { f64::NAN } else { lerp(&snap.x, &snap.eta, xp) - eta0 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ScenarioConfig {
        ScenarioConfig::from_toml_str(
            r#"
            delta = 1.0
            order = 3
            output_times = [1.0, 2.0]
            [bathymetry]
            kind = "piecewise_constant"
            breakpoints = [0.5, 1.0]
            values = [1.0, 0.3]
            [initial_condition]
            kind = "gaussian"
            amplitude = 0.025
            width = 3.0
            [domain]
            half_length = 20.0
            m = 256
            fv_length = 20.0
            cells_per_period = 64
            "#,
        )
        .unwrap()
    }

    #[test]
    fn defaults_and_round_trip() {
        let c = sample();
        assert_eq!(c.g, 9.81);
        assert_eq!(c.eta0, 0.0);
        let again = ScenarioConfig::from_toml_str(&c.to_toml_string().unwrap()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn rejects_coarse_reference_and_bad_times() {
        let mut c = sample();
        c.domain.cells_per_period = 32;
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let mut c = sample();
        c.output_times = vec![2.0, 1.0];
        assert!(c.validate().is_err());
    }

    #[test]
    fn sampler_reproduces_trig() {
        let l = 10.0;
        let x = periodic_grid(l, 64);
        let v: Vec<f64> = x.iter().map(|x| (std::f64::consts::PI * x / l).sin()).collect();
        let s = PeriodicSampler::new(-l, 2.0 * l, &v, 8);
        for xp in [-9.97, 0.123, 3.3, 19.0] {
            let e = (s.at(xp) - (std::f64::consts::PI * xp / l).sin()).abs();
            assert!(e < 1e-3, "{xp} {e}");
        }
    }

    #[test]
    fn csv_has_seventeen_digits() {
        let mut q = vec![0.0; 16];
        q[1] = 1.0 / 3.0;
        let s = FieldState::new(1.0, vec![0.1; 16], q).unwrap();
        let mut out = Vec::new();
        write_homogenized_csv(&mut out, &[s], None, None).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        let row: Vec<&str> = lines.nth(1).unwrap().split(',').collect();
        assert_eq!(row[3], "3.3333333333333331e-1");
        assert_eq!(row[3].parse::<f64>().unwrap(), 1.0 / 3.0);
    }
}
