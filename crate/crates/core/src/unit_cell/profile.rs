use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::unit_cell::grid::{check_cell_size, CellGrid};
use crate::unit_cell::piecewise::PiecewisePolynomial;
use crate::unit_cell::CellFunction;

/// Relative defect below which a profile counts as translation-even.
pub const EVEN_TOL: f64 = 1e-8;

const BREAK_TOL: f64 = 1e-12;

/// Still-water depth over one bathymetry period, rescaled to `y in [0, 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PeriodicProfile {
    /// Segment `i` covers `[breakpoints[i-1], breakpoints[i])` (with `breakpoints[-1] = 0`)
    /// at constant depth `values[i]`.
    PiecewiseConstant { breakpoints: Vec<f64>, values: Vec<f64> },
    /// `H(y) = mean + amplitude * sin(2 pi y + phase)`.
    Sinusoidal {
        mean: f64,
        amplitude: f64,
        #[serde(default)]
        phase: f64,
    },
    /// Depth samples on `y_i = i/N`.
    Sampled { values: Vec<f64> },
}

/// Legendre polynomial `P_n(x)` by the three-term recurrence.
fn legendre(n: u32, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return p0;
    }
    for k in 1..n {
        let k = k as f64;
        let p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

impl PeriodicProfile {
    pub fn flat(depth: f64) -> Self {
        PeriodicProfile::PiecewiseConstant {
            breakpoints: vec![1.0],
            values: vec![depth],
        }
    }

    pub fn two_layer(h1: f64, h2: f64) -> Self {
        PeriodicProfile::PiecewiseConstant {
            breakpoints: vec![0.5, 1.0],
            values: vec![h1, h2],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PeriodicProfile::PiecewiseConstant { breakpoints, values } => {
                if breakpoints.is_empty() || breakpoints.len() != values.len() {
                    return Err(Error::InvalidProfile(
                        "breakpoints and values must have equal nonzero length".into(),
                    ));
                }
                let mut prev = 0.0;
                for &b in breakpoints {
                    if !(b > prev) || !b.is_finite() {
                        return Err(Error::InvalidProfile(
                            "breakpoints must be strictly increasing in (0, 1]".into(),
                        ));
                    }
                    prev = b;
                }
                if (prev - 1.0).abs() > BREAK_TOL {
                    return Err(Error::InvalidProfile("last breakpoint must be 1".into()));
                }
                check_positive(values)
            }
            PeriodicProfile::Sinusoidal { mean, amplitude, phase } => {
                if !mean.is_finite() || !amplitude.is_finite() || !phase.is_finite() {
                    return Err(Error::InvalidProfile("non-finite sinusoid parameter".into()));
                }
                let min = mean - amplitude.abs();
                if !(min > 0.0) {
                    return Err(Error::NonPositiveDepth { min });
                }
                Ok(())
            }
            PeriodicProfile::Sampled { values } => {
                check_cell_size(values.len())?;
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidProfile("non-finite sample".into()));
                }
                check_positive(values)
            }
        }
    }

    pub fn eval(&self, y: f64) -> f64 {
        let y = y.rem_euclid(1.0);
        match self {
            PeriodicProfile::PiecewiseConstant { breakpoints, values } => {
                let i = breakpoints.iter().position(|&b| y < b).unwrap_or(values.len() - 1);
                values[i]
            }
            PeriodicProfile::Sinusoidal { mean, amplitude, phase } => {
                mean + amplitude * (2.0 * PI * y + phase).sin()
            }
            PeriodicProfile::Sampled { values } => {
                CellGrid::new(values.clone()).map(|g| g.eval(y)).unwrap_or(f64::NAN)
            }
        }
    }

    pub fn min_depth(&self) -> f64 {
        match self {
            PeriodicProfile::PiecewiseConstant { values, .. } | PeriodicProfile::Sampled { values } => {
                values.iter().copied().fold(f64::INFINITY, f64::min)
            }
            PeriodicProfile::Sinusoidal { mean, amplitude, .. } => mean - amplitude.abs(),
        }
    }

    pub fn max_depth(&self) -> f64 {
        match self {
            PeriodicProfile::PiecewiseConstant { values, .. } | PeriodicProfile::Sampled { values } => {
                values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            }
            PeriodicProfile::Sinusoidal { mean, amplitude, .. } => mean + amplitude.abs(),
        }
    }

    /// True when the depth does not vary within relative tolerance `tol`.
    pub fn is_flat(&self, tol: f64) -> bool {
        let (lo, hi) = (self.min_depth(), self.max_depth());
        hi - lo <= tol * hi.abs()
    }

    /// Cell mean of `H`.
    pub fn mean(&self) -> f64 {
        match self {
            PeriodicProfile::PiecewiseConstant { breakpoints, values } => {
                segment_widths(breakpoints).zip(values).map(|(w, v)| w * v).sum()
            }
            PeriodicProfile::Sinusoidal { mean, .. } => *mean,
            PeriodicProfile::Sampled { values } => values.iter().sum::<f64>() / values.len() as f64,
        }
    }

    /// Inverse-depth moment `<H^-k>` for `k >= 1`.
    pub fn moment(&self, k: u32) -> Result<f64> {
        self.validate()?;
        if k == 0 {
            return Err(Error::InvalidArgument("moment order must be positive".into()));
        }
        Ok(match self {
            PeriodicProfile::PiecewiseConstant { breakpoints, values } => segment_widths(breakpoints)
                .zip(values)
                .map(|(w, v)| w * v.powi(-(k as i32)))
                .sum(),
            PeriodicProfile::Sinusoidal { mean, amplitude, .. } => {
                // <(m + a sin)^-(n+1)> = P_n(m/s) / s^(n+1), s = sqrt(m^2 - a^2)
                let s = (mean * mean - amplitude * amplitude).sqrt();
                legendre(k - 1, mean / s) / s.powi(k as i32)
            }
            PeriodicProfile::Sampled { values } => {
                values.iter().map(|v| v.powi(-(k as i32))).sum::<f64>() / values.len() as f64
            }
        })
    }

    /// `H` sampled on an `n`-point cell grid (sampled profiles keep their own grid).
    pub fn grid(&self, n: usize) -> Result<CellGrid> {
        self.validate()?;
        match self {
            PeriodicProfile::Sampled { values } => CellGrid::new(values.clone()),
            _ => CellGrid::from_fn(n, |y| self.eval(y)),
        }
    }

    /// Exact `H^-k` as a piecewise polynomial, available for piecewise-constant profiles.
    pub fn inverse_power_exact(&self, k: u32) -> Option<PiecewisePolynomial> {
        self.power_exact(-(k as i32))
    }

    /// Exact `H^p` for piecewise-constant profiles.
    pub fn power_exact(&self, p: i32) -> Option<PiecewisePolynomial> {
        match self {
            PeriodicProfile::PiecewiseConstant { breakpoints, values } => {
                let inv: Vec<f64> = values.iter().map(|v| v.powi(p)).collect();
                PiecewisePolynomial::piecewise_constant(breakpoints, &inv).ok()
            }
            _ => None,
        }
    }

    /// Shift `sigma` such that `H(y - sigma)` is even about `y = 1/2`, if one exists.
    pub fn translation_even_shift(&self) -> Option<f64> {
        let axis = match self {
            PeriodicProfile::Sinusoidal { phase, .. } => {
                // crest where 2 pi y + phase = pi/2
                Some((0.25 - phase / (2.0 * PI)).rem_euclid(1.0))
            }
            PeriodicProfile::PiecewiseConstant { breakpoints, values } => {
                piecewise_even_axis(breakpoints, values)
            }
            PeriodicProfile::Sampled { values } => {
                let g = CellGrid::new(values.clone()).ok()?;
                let (axis, defect) = g.best_reflection_axis();
                (defect < EVEN_TOL * g.max_abs()).then_some(axis)
            }
        }?;
        Some((0.5 - axis).rem_euclid(1.0))
    }

    pub fn is_translation_even(&self) -> bool {
        self.translation_even_shift().is_some()
    }
}

fn check_positive(values: &[f64]) -> Result<()> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min > 0.0) {
        return Err(Error::NonPositiveDepth { min });
    }
    Ok(())
}

fn segment_widths(breakpoints: &[f64]) -> impl Iterator<Item = f64> + '_ {
    breakpoints
        .iter()
        .scan(0.0, |prev, &b| {
            let w = b - *prev;
            *prev = b;
            Some(w)
        })
}

/// Reflection axis of a piecewise-constant profile, searched among segment
/// centres and breakpoints.
fn piecewise_even_axis(breakpoints: &[f64], values: &[f64]) -> Option<f64> {
    let f = PiecewisePolynomial::piecewise_constant(breakpoints, values).ok()?;
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut starts = vec![0.0];
    starts.extend_from_slice(&breakpoints[..breakpoints.len() - 1]);
    let mut candidates: Vec<f64> = starts.clone();
    for (a, b) in starts.iter().zip(breakpoints) {
        candidates.push(0.5 * (a + b));
    }
    'cand: for &p in &candidates {
        // mirror images of all breaks, then test every sub-interval midpoint
        let mut pts: Vec<f64> = starts.clone();
        pts.extend(starts.iter().map(|&b| (2.0 * p - b).rem_euclid(1.0)));
        pts.push(1.0);
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for w in pts.windows(2) {
            if w[1] - w[0] <= BREAK_TOL {
                continue;
            }
            let y = 0.5 * (w[0] + w[1]);
            if (f.eval(y) - f.eval(2.0 * p - y)).abs() > EVEN_TOL * scale {
                continue 'cand;
            }
        }
        return Some(p);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario_a() -> PeriodicProfile {
        PeriodicProfile::two_layer(1.0, 0.3)
    }

    #[test]
    fn validation() {
        assert!(scenario_a().validate().is_ok());
        assert!(PeriodicProfile::two_layer(1.0, -0.1).validate().is_err());
        let bad = PeriodicProfile::PiecewiseConstant {
            breakpoints: vec![0.5, 0.4, 1.0],
            values: vec![1.0, 1.0, 1.0],
        };
        assert!(bad.validate().is_err());
        let short = PeriodicProfile::PiecewiseConstant {
            breakpoints: vec![0.5, 0.9],
            values: vec![1.0, 1.0],
        };
        assert!(short.validate().is_err());
        let s = PeriodicProfile::Sinusoidal { mean: 0.4, amplitude: 0.4, phase: 0.0 };
        assert!(matches!(s.validate(), Err(Error::NonPositiveDepth { .. })));
    }

    #[test]
    fn piecewise_moments() {
        let h = scenario_a();
        assert!((h.moment(1).unwrap() - 13.0 / 6.0).abs() < 1e-15);
        assert!((h.moment(2).unwrap() - (1.0 + 1.0 / 0.09) / 2.0).abs() < 1e-13);
        assert!((PeriodicProfile::flat(2.0).moment(3).unwrap() - 0.125).abs() < 1e-16);
        assert!(h.moment(0).is_err());
    }

    #[test]
    fn sinusoidal_moments_match_quadrature() {
        let h = PeriodicProfile::Sinusoidal { mean: 0.6, amplitude: -0.4, phase: 0.3 };
        let g = h.grid(512).unwrap();
        for k in 1..=7 {
            let q = g.powi(-(k as i32)).mean();
            let m = h.moment(k).unwrap();
            assert!(((q - m) / m).abs() < 1e-13, "k={k}: {q} vs {m}");
        }
    }

    #[test]
    fn translation_even_detection() {
        assert!(scenario_a().is_translation_even());
        let three = PeriodicProfile::PiecewiseConstant {
            breakpoints: vec![0.2, 0.5, 1.0],
            values: vec![1.0, 2.0, 3.0],
        };
        assert!(!three.is_translation_even());
        let sym = PeriodicProfile::PiecewiseConstant {
            breakpoints: vec![0.1, 0.4, 0.5, 1.0],
            values: vec![1.0, 2.0, 1.0, 0.5],
        };
        let s = sym.translation_even_shift().unwrap();
        for &y in &[0.03, 0.21, 0.37, 0.66] {
            let a = sym.eval(y - s);
            let b = sym.eval(1.0 - y - s);
            assert_eq!(a, b);
        }
        let sin = PeriodicProfile::Sinusoidal { mean: 0.6, amplitude: -0.4, phase: 0.0 };
        let s = sin.translation_even_shift().unwrap();
        for &y in &[0.1, 0.27, 0.4] {
            assert!((sin.eval(y - s) - sin.eval(1.0 - y - s)).abs() < 1e-14);
        }
    }

    #[test]
    fn sampled_even_detection() {
        let even = PeriodicProfile::Sampled {
            values: (0..64)
                .map(|i| 2.0 + (2.0 * PI * (i as f64 - 5.0) / 64.0).cos())
                .collect(),
        };
        assert!(even.is_translation_even());
        let odd = PeriodicProfile::Sampled {
            values: (0..64)
                .map(|i| {
                    let y = i as f64 / 64.0;
                    2.0 + (2.0 * PI * y).cos() + 0.3 * (4.0 * PI * y).sin()
                })
                .collect(),
        };
        assert!(!odd.is_translation_even());
    }

    #[test]
    fn serde_tagging() {
        let s = toml::to_string(&scenario_a()).unwrap();
        assert!(s.contains("kind = \"piecewise_constant\""));
        let back: PeriodicProfile = toml::from_str(&s).unwrap();
        assert_eq!(back, scenario_a());
    }
}
