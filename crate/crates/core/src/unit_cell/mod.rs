//! Unit-cell profiles and the averaging functionals: mean, fluctuation and bracket.
//!
//! The bracket `[[f]]` is the zero-mean antiderivative of `{f} = f - <f>`,
//! equivalently `[[f]](y) = int_0^y f - int_0^1 (1/2 + y - xi) f(xi) dxi`.

mod grid;
pub mod identities;
mod piecewise;
mod profile;

pub use grid::{CellGrid, DEFAULT_CELL_POINTS};
pub use piecewise::PiecewisePolynomial;
pub use profile::{PeriodicProfile, EVEN_TOL};

use crate::error::{Error, Result};

/// A 1-periodic function on which the averaging functionals act.
pub trait CellFunction: Sized + Clone {
    /// `<f>`
    fn mean(&self) -> f64;
    /// `{f} = f - <f>`
    fn fluctuation(&self) -> Self;
    /// `[[f]]`
    fn bracket(&self) -> Self;
    fn mul(&self, other: &Self) -> Result<Self>;
    fn add(&self, other: &Self) -> Result<Self>;
    fn scale(&self, s: f64) -> Self;
    fn eval(&self, y: f64) -> f64;

    /// Bracket applied `j >= 1` times.
    fn nested_bracket(&self, j: usize) -> Result<Self> {
        if j == 0 {
            return Err(Error::InvalidArgument("bracket nesting depth must be >= 1".into()));
        }
        let mut out = self.bracket();
        for _ in 1..j {
            out = out.bracket();
        }
        Ok(out)
    }
}

pub fn mean<T: CellFunction>(f: &T) -> f64 {
    f.mean()
}

pub fn fluctuation<T: CellFunction>(f: &T) -> T {
    f.fluctuation()
}

pub fn bracket<T: CellFunction>(f: &T) -> T {
    f.bracket()
}

pub fn nested_bracket<T: CellFunction>(f: &T, j: usize) -> Result<T> {
    f.nested_bracket(j)
}

/// `<f_1 f_2 ... f_n>`; grids must share their size.
pub fn product_mean<T: CellFunction>(factors: &[&T]) -> Result<f64> {
    let (first, rest) = factors
        .split_first()
        .ok_or_else(|| Error::InvalidArgument("product_mean needs at least one factor".into()))?;
    let mut p = (*first).clone();
    for f in rest {
        p = p.mul(f)?;
    }
    Ok(p.mean())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn mean_examples() {
        assert_eq!(mean(&CellGrid::constant(16, 1.0).unwrap()), 1.0);
        let c = CellGrid::from_fn(32, |y| (2.0 * PI * y).cos()).unwrap();
        assert!(mean(&c).abs() < 1e-16);
        let h = PeriodicProfile::two_layer(1.0, 0.3);
        let inv = h.inverse_power_exact(1).unwrap();
        assert!((mean(&inv) - 13.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn product_mean_examples() {
        let one = CellGrid::constant(16, 1.0).unwrap();
        assert!((product_mean(&[&one, &one]).unwrap() - 1.0).abs() < 1e-15);
        let c = CellGrid::from_fn(64, |y| (2.0 * PI * y).cos()).unwrap();
        assert!((product_mean(&[&c, &c]).unwrap() - 0.5).abs() < 1e-15);
        let bb = c.nested_bracket(2).unwrap();
        let exact = -1.0 / (8.0 * PI * PI);
        assert!((product_mean(&[&c, &bb]).unwrap() - exact).abs() < 1e-15);
        let other = CellGrid::constant(32, 1.0).unwrap();
        assert!(matches!(
            product_mean(&[&one, &other]),
            Err(Error::GridMismatch { .. })
        ));
    }

    #[test]
    fn nested_bracket_edge_cases() {
        let z = CellGrid::constant(16, 0.0).unwrap();
        assert_eq!(z.nested_bracket(4).unwrap().max_abs(), 0.0);
        assert!(z.nested_bracket(0).is_err());
        let c = CellGrid::from_fn(64, |y| (2.0 * PI * y).cos() + 3.0).unwrap();
        assert_eq!(c.nested_bracket(1).unwrap(), c.bracket());
        assert!(CellGrid::constant(16, 7.0).unwrap().bracket().max_abs() < 1e-15);
    }
}
