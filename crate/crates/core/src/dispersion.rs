//! Linear dispersion relations of the three arrangements of the dispersive term.
//!
//! Nondimensional variables: `Omega = omega/(c k)`, `K = k sqrt(delta^2 mu)`.
//! Root ordering convention: real branches first, positive before negative;
//! then the upper and lower imaginary branches.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coefficients::HomogenizedCoefficients;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    /// `K^2 Omega^4 + Omega^2 - 1 = 0`
    Ttt,
    /// `Omega^2 + K^2 - 1 = 0`
    Xxx,
    /// `Omega^2 (1 + K^2) - 1 = 0`
    Xxt,
    /// `Omega^2 (1 + K^2 + r K^4) - 1 = 0`
    Xxt5,
}

impl Form {
    pub fn parse(s: &str) -> Result<Form> {
        match s {
            "ttt" => Ok(Form::Ttt),
            "xxx" => Ok(Form::Xxx),
            "xxt" => Ok(Form::Xxt),
            "xxt5" => Ok(Form::Xxt5),
            _ => Err(Error::InvalidArgument(format!(
                "unknown dispersion form '{s}' (expected ttt, xxx, xxt, xxt5)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Form::Ttt => "ttt",
            Form::Xxx => "xxx",
            Form::Xxt => "xxt",
            Form::Xxt5 => "xxt5",
        }
    }

    /// Number of roots, finite or at infinity.
    pub fn degree(self) -> usize {
        match self {
            Form::Ttt => 4,
            _ => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DispersionPoint {
    pub k: f64,
    pub form: Form,
    /// Finite roots in the documented order.
    pub roots: Vec<Complex64>,
    /// Roots that escaped to infinity in a degenerate limit.
    pub roots_at_infinity: usize,
}

impl DispersionPoint {
    /// A root with positive imaginary part exists (exponential growth).
    pub fn unstable(&self) -> bool {
        self.roots.iter().any(|z| z.im > 0.0) || self.roots_at_infinity > 0 && self.form != Form::Ttt
    }

    pub fn all_real(&self) -> bool {
        self.roots_at_infinity == 0 && self.roots.iter().all(|z| z.im == 0.0)
    }
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn imag(x: f64) -> Complex64 {
    Complex64::new(0.0, x)
}

/// Roots of `K^2 Omega^4 + Omega^2 - 1 = 0`.
pub fn omega_form1(k: f64) -> DispersionPoint {
    if k == 0.0 {
        return DispersionPoint {
            k,
            form: Form::Ttt,
            roots: vec![real(1.0), real(-1.0)],
            roots_at_infinity: 2,
        };
    }
    let k2 = k * k;
    let s = (1.0 + 4.0 * k2).sqrt();
    // Z+ written without cancellation
    let zp = 2.0 / (1.0 + s);
    let zm = -(1.0 + s) / (2.0 * k2);
    let (a, b) = (zp.sqrt(), (-zm).sqrt());
    DispersionPoint {
        k,
        form: Form::Ttt,
        roots: vec![real(a), real(-a), imag(b), imag(-b)],
        roots_at_infinity: 0,
    }
}

/// Roots of `Omega^2 + K^2 - 1 = 0`.
pub fn omega_form2(k: f64) -> DispersionPoint {
    let d = 1.0 - k * k;
    let roots = if d >= 0.0 {
        let a = d.sqrt();
        vec![real(a), real(-a)]
    } else {
        let b = (-d).sqrt();
        vec![imag(b), imag(-b)]
    };
    DispersionPoint {
        k,
        form: Form::Xxx,
        roots,
        roots_at_infinity: 0,
    }
}

/// Roots of `Omega^2 (1 + K^2 [+ r K^4]) - 1 = 0`.
pub fn omega_form3(k: f64, r: Option<f64>) -> DispersionPoint {
    let k2 = k * k;
    let d = 1.0 + k2 + r.unwrap_or(0.0) * k2 * k2;
    let form = if r.is_some() { Form::Xxt5 } else { Form::Xxt };
    if d == 0.0 {
        return DispersionPoint {
            k,
            form,
            roots: vec![],
            roots_at_infinity: 2,
        };
    }
    let roots = if d > 0.0 {
        let a = 1.0 / d.sqrt();
        vec![real(a), real(-a)]
    } else {
        let b = 1.0 / (-d).sqrt();
        vec![imag(b), imag(-b)]
    };
    DispersionPoint {
        k,
        form,
        roots,
        roots_at_infinity: 0,
    }
}

pub fn omega(form: Form, k: f64, r: Option<f64>) -> DispersionPoint {
    match form {
        Form::Ttt => omega_form1(k),
        Form::Xxx => omega_form2(k),
        Form::Xxt => omega_form3(k, None),
        Form::Xxt5 => omega_form3(k, Some(r.unwrap_or(0.0))),
    }
}

/// Residual of `root` in its defining polynomial, relative to the sum of term magnitudes.
pub fn relative_residual(form: Form, k: f64, root: Complex64, r: Option<f64>) -> f64 {
    let k2 = k * k;
    let w2 = root * root;
    let (val, scale) = match form {
        Form::Ttt => (k2 * w2 * w2 + w2 - 1.0, k2 * w2.norm_sqr() + w2.norm() + 1.0),
        Form::Xxx => (w2 + k2 - 1.0, w2.norm() + k2 + 1.0),
        Form::Xxt | Form::Xxt5 => {
            let r = if form == Form::Xxt5 { r.unwrap_or(0.0) } else { 0.0 };
            let d = 1.0 + k2 + r * k2 * k2;
            (w2 * d - 1.0, w2.norm() * (1.0 + k2 + r.abs() * k2 * k2) + 1.0)
        }
    };
    val.norm() / scale
}

/// Quartic parameter `r = (nu1 + nu2)/mu^2 - 1` of the corrected relation.
pub fn quartic_ratio(coeffs: &HomogenizedCoefficients) -> Result<f64> {
    if !(coeffs.mu > 0.0) {
        return Err(Error::FlatBottom);
    }
    Ok((coeffs.nu1 + coeffs.nu2) / (coeffs.mu * coeffs.mu) - 1.0)
}

/// Largest stable wavenumber of form `xxx`, `1/(delta sqrt(mu))`; infinite for a flat bottom.
pub fn k_max(coeffs: &HomogenizedCoefficients, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    if coeffs.mu <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(1.0 / (delta * coeffs.mu.sqrt()))
}

/// Dimensional angular frequency of the positive real branch of form `xxt`
/// (or `xxt5` when `fifth` is set) at wavenumber `k`.
pub fn omega_dimensional(coeffs: &HomogenizedCoefficients, delta: f64, k: f64, fifth: bool) -> f64 {
    let mu_hat = delta * delta * coeffs.mu;
    let q = if fifth {
        delta.powi(4) * coeffs.stability_margin()
    } else {
        0.0
    };
    let k2 = k * k;
    coeffs.c * k / (1.0 + mu_hat * k2 + q * k2 * k2).sqrt()
}

/// Sample a form on the given `K` values.
pub fn curve(form: Form, ks: &[f64], r: Option<f64>) -> Vec<DispersionPoint> {
    ks.iter().map(|&k| omega(form, k, r)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::unit_cell::PeriodicProfile;

    #[test]
    fn form1_at_one() {
        let p = omega_form1(1.0);
        assert!((p.roots[0].re - 0.786151377757423).abs() < 1e-12);
        assert!((p.roots[2].im - 1.272019649514069).abs() < 1e-12);
        assert_eq!(p.roots.iter().filter(|z| z.im > 0.0).count(), 1);
        for z in &p.roots {
            assert!(relative_residual(Form::Ttt, 1.0, *z, None) < 1e-15);
        }
    }

    #[test]
    fn form1_limit() {
        let p = omega_form1(0.0);
        assert_eq!(p.roots_at_infinity, 2);
        assert_eq!(p.roots.len(), 2);
        let k = 1e-3;
        let w = omega_form1(k).roots[0].re;
        assert!((w - (1.0 - k * k / 2.0)).abs() < 2.0 * k.powi(4));
    }

    #[test]
    fn form2_cases() {
        assert_eq!(omega_form2(0.0).roots[0].re, 1.0);
        let p = omega_form2(1.0);
        assert_eq!(p.roots[0], real(0.0));
        assert!(!p.unstable());
        let p = omega_form2(2.0);
        assert!(p.unstable());
        assert!((p.roots[0].im - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn form3_cases() {
        assert_eq!(omega_form3(0.0, None).roots[0].re, 1.0);
        assert!((omega_form3(1.0, None).roots[0].re - 0.5f64.sqrt()).abs() < 1e-15);
        let r = (1.0 / 40.0 + 3.0 / 40.0) / 0.02 - 1.0;
        for i in 0..200 {
            assert!(omega_form3(i as f64 * 0.5, Some(r)).all_real());
        }
        assert!(omega_form3(2.0, Some(-1.0)).unstable());
    }

    #[test]
    fn k_max_scenario_a() {
        let c = HomogenizedCoefficients::compute(&PeriodicProfile::two_layer(1.0, 0.3), 9.81).unwrap();
        let k1 = k_max(&c, 1.0).unwrap();
        assert!((k1 - (8112.0f64 / 49.0).sqrt()).abs() < 1e-10);
        assert!((k_max(&c, 2.0).unwrap() - k1 / 2.0).abs() < 1e-12);
        let flat = HomogenizedCoefficients::compute(&PeriodicProfile::flat(1.0), 9.81).unwrap();
        assert!(k_max(&flat, 1.0).unwrap().is_infinite());
        assert!(k_max(&c, 0.0).is_err());
    }
}
