use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{mode_index, Transform};
use crate::unit_cell::CellFunction;

/// Default number of cell samples.
pub const DEFAULT_CELL_POINTS: usize = 512;

/// Samples of a 1-periodic function on `y_i = i/N`, `N` a power of two, `N >= 16`.
#[derive(Clone, Debug, PartialEq)]
pub struct CellGrid {
    values: Vec<f64>,
}

pub fn check_cell_size(n: usize) -> Result<()> {
    if n < 16 || !n.is_power_of_two() {
        return Err(Error::InvalidGrid(format!(
            "cell grid size must be a power of two >= 16, got {n}"
        )));
    }
    Ok(())
}

impl CellGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_cell_size(values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid("non-finite sample".into()));
        }
        Ok(CellGrid { values })
    }

    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        check_cell_size(n)?;
        Self::new((0..n).map(|i| f(i as f64 / n as f64)).collect())
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::from_fn(n, |_| c)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn points(&self) -> Vec<f64> {
        let n = self.len() as f64;
        (0..self.len()).map(|i| i as f64 / n).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        CellGrid {
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn powi(&self, k: i32) -> Self {
        self.map(|v| v.powi(k))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::GridMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(())
    }

    fn spectrum(&self) -> Vec<Complex64> {
        Transform::new(self.len()).forward_real(&self.values)
    }

    fn from_spectrum(spec: &[Complex64]) -> Self {
        CellGrid {
            values: Transform::new(spec.len()).inverse_real(spec),
        }
    }

    /// Bracket by cumulative trapezoid integration of `{f}`; second-order accurate,
    /// suited to non-smooth samples.
    pub fn bracket_trapezoid(&self) -> Self {
        let n = self.len();
        let g = self.fluctuation();
        let h = 1.0 / n as f64;
        let mut acc = vec![0.0; n];
        for i in 1..n {
            acc[i] = acc[i - 1] + 0.5 * h * (g.values[i - 1] + g.values[i]);
        }
        let m = acc.iter().sum::<f64>() / n as f64;
        CellGrid {
            values: acc.into_iter().map(|v| v - m).collect(),
        }
    }

    /// Spectral derivative `f'`.
    pub fn derivative(&self) -> Self {
        let n = self.len();
        let mut spec = self.spectrum();
        for (j, s) in spec.iter_mut().enumerate() {
            *s *= Complex64::new(0.0, 2.0 * PI * mode_index(j, n));
        }
        Self::from_spectrum(&spec)
    }

    /// Shift by `m` samples: result(y) = f(y - m/N).
    pub fn shift(&self, m: isize) -> Self {
        let n = self.len() as isize;
        CellGrid {
            values: (0..n)
                .map(|i| self.values[(i - m).rem_euclid(n) as usize])
                .collect(),
        }
    }

    /// Reflection about the cell midpoint: result(y) = f(1 - y).
    pub fn reflect(&self) -> Self {
        let n = self.len();
        CellGrid {
            values: (0..n).map(|i| self.values[(n - i) % n]).collect(),
        }
    }

    /// Reflection axis `y = p/(2N)` with the smallest even-symmetry defect,
    /// returned together with that defect.
    pub fn best_reflection_axis(&self) -> (f64, f64) {
        let n = self.len();
        let mut best = (0.0, f64::INFINITY);
        for p in 0..2 * n {
            // axis at index p/2: f(j) against f(p - j)
            let mut d: f64 = 0.0;
            for j in 0..n {
                let r = (p as isize - j as isize).rem_euclid(n as isize) as usize;
                d = d.max((self.values[j] - self.values[r]).abs());
                if d >= best.1 {
                    break;
                }
            }
            if d < best.1 {
                best = (p as f64 / (2 * n) as f64, d);
            }
        }
        best
    }
}

impl CellFunction for CellGrid {
    fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }

    fn fluctuation(&self) -> Self {
        let m = self.mean();
        self.map(|v| v - m)
    }

    /// Fourier antidifferentiation: mode `k` divided by `i 2 pi k`, mean and Nyquist dropped.
    fn bracket(&self) -> Self {
        let n = self.len();
        let mut spec = self.spectrum();
        for (j, s) in spec.iter_mut().enumerate() {
            let k = mode_index(j, n);
            if k == 0.0 {
                *s = Complex64::new(0.0, 0.0);
            } else {
                *s /= Complex64::new(0.0, 2.0 * PI * k);
            }
        }
        Self::from_spectrum(&spec)
    }

    fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(CellGrid {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        })
    }

    fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(CellGrid {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        })
    }

    fn scale(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    /// Periodic four-point Lagrange interpolation.
    fn eval(&self, y: f64) -> f64 {
        let n = self.len();
        let s = y.rem_euclid(1.0) * n as f64;
        let i0 = s.floor();
        let t = s - i0;
        let i0 = i0 as isize;
        let at = |k: isize| self.values[(i0 + k).rem_euclid(n as isize) as usize];
        let (fm, f0, f1, f2) = (at(-1), at(0), at(1), at(2));
        -t * (t - 1.0) * (t - 2.0) / 6.0 * fm + (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0 * f0
            - (t + 1.0) * t * (t - 2.0) / 2.0 * f1
            + (t + 1.0) * t * (t - 1.0) / 6.0 * f2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cos_mode(n: usize, j: f64) -> CellGrid {
        CellGrid::from_fn(n, |y| (2.0 * PI * j * y).cos()).unwrap()
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(CellGrid::new(vec![0.0; 8]).is_err());
        assert!(CellGrid::new(vec![0.0; 24]).is_err());
        assert!(CellGrid::new(vec![0.0; 16]).is_ok());
    }

    #[test]
    fn fluctuation_examples() {
        let f = CellGrid::constant(64, 5.0).unwrap().fluctuation();
        assert!(f.max_abs() < 1e-15);
        let g = CellGrid::from_fn(64, |y| 1.0 + (2.0 * PI * y).cos()).unwrap();
        let e = g.fluctuation().sub(&cos_mode(64, 1.0)).unwrap();
        assert!(e.max_abs() < 1e-14);
    }

    #[test]
    fn bracket_of_cosine() {
        for j in 1..6 {
            let b = cos_mode(128, j as f64).bracket();
            let jf = j as f64;
            let exact = CellGrid::from_fn(128, |y| (2.0 * PI * jf * y).sin() / (2.0 * PI * jf)).unwrap();
            assert!(b.sub(&exact).unwrap().max_abs() < 1e-15);
        }
    }

    #[test]
    fn double_bracket_of_cosine() {
        let b = cos_mode(64, 1.0).nested_bracket(2).unwrap();
        let exact = cos_mode(64, 1.0).scale(-1.0 / (4.0 * PI * PI));
        assert!(b.sub(&exact).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn trapezoid_agrees_with_spectral_on_smooth_input() {
        let f = CellGrid::from_fn(1024, |y| (2.0 * PI * y).sin().exp()).unwrap();
        let d = f.bracket().sub(&f.bracket_trapezoid()).unwrap().max_abs();
        assert!(d < 1e-6, "{d}");
    }

    #[test]
    fn shift_and_reflect() {
        let f = CellGrid::from_fn(32, |y| y.sin()).unwrap();
        assert_eq!(f.shift(3).shift(-3), f);
        assert_eq!(f.reflect().reflect(), f);
        let g = CellGrid::from_fn(32, |y| (2.0 * PI * (y - 0.3)).cos()).unwrap();
        let (axis, defect) = g.best_reflection_axis();
        assert!(defect < 0.15);
        assert!((axis - 0.3).abs() < 1.0 / 64.0 + 1e-12 || (axis - 0.8).abs() < 1.0 / 64.0 + 1e-12);
    }

    #[test]
    fn eval_interpolates_smooth() {
        let f = cos_mode(256, 1.0);
        for &y in &[0.013, 0.5, 0.777] {
            assert!((f.eval(y) - (2.0 * PI * y).cos()).abs() < 1e-7);
        }
    }
}
