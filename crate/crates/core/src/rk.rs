//! Bogacki–Shampine 5(4) embedded Runge–Kutta pair with FSAL and step-size control.

use crate::error::{Error, Result};

const C: [f64; 8] = [0.0, 1.0 / 6.0, 2.0 / 9.0, 3.0 / 7.0, 2.0 / 3.0, 3.0 / 4.0, 1.0, 1.0];

const A: [&[f64]; 8] = [
    &[],
    &[1.0 / 6.0],
    &[2.0 / 27.0, 4.0 / 27.0],
    &[183.0 / 1372.0, -162.0 / 343.0, 1053.0 / 1372.0],
    &[68.0 / 297.0, -4.0 / 11.0, 42.0 / 143.0, 1960.0 / 3861.0],
    &[
        597.0 / 22528.0,
        81.0 / 352.0,
        63099.0 / 585728.0,
        58653.0 / 366080.0,
        4617.0 / 20480.0,
    ],
    &[
        174197.0 / 959244.0,
        -30942.0 / 79937.0,
        8152137.0 / 19744439.0,
        666106.0 / 1039181.0,
        -29421.0 / 29068.0,
        482048.0 / 414219.0,
    ],
    &[
        587.0 / 8064.0,
        0.0,
        4440339.0 / 15491840.0,
        24353.0 / 124800.0,
        387.0 / 44800.0,
        2152.0 / 5985.0,
        7267.0 / 94080.0,
    ],
];

/// Fifth-order weights; the last stage is evaluated at the new solution (FSAL).
const B: [f64; 8] = [
    587.0 / 8064.0,
    0.0,
    4440339.0 / 15491840.0,
    24353.0 / 124800.0,
    387.0 / 44800.0,
    2152.0 / 5985.0,
    7267.0 / 94080.0,
    0.0,
];

/// Embedded fourth-order weights.
const B_HAT: [f64; 8] = [
    2479.0 / 34992.0,
    0.0,
    123.0 / 416.0,
    612941.0 / 3411720.0,
    43.0 / 1440.0,
    2272.0 / 6561.0,
    79937.0 / 1113912.0,
    3293.0 / 556956.0,
];

/// Right-hand side `dy = f(t, y)`.
pub trait Rhs {
    fn eval(&mut self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()>;
}

impl<F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>> Rhs for F {
    fn eval(&mut self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        self(t, y, dy)
    }
}

/// Stage storage for one system size.
#[derive(Clone, Debug)]
pub struct Stepper {
    k: Vec<Vec<f64>>,
    tmp: Vec<f64>,
    k1_valid: bool,
    pub evals: usize,
}

impl Stepper {
    pub fn new(n: usize) -> Self {
        Stepper {
            k: vec![vec![0.0; n]; 8],
            tmp: vec![0.0; n],
            k1_valid: false,
            evals: 0,
        }
    }

    /// Forget the cached first stage (call after modifying the state externally).
    pub fn reset(&mut self) {
        self.k1_valid = false;
    }

    /// Trial step of size `h` from `(t, y)`. Writes the fifth-order solution into `y_out`
    /// and, if requested, the difference to the embedded solution into `err`.
    pub fn try_step<F: Rhs>(
        &mut self,
        f: &mut F,
        t: f64,
        y: &[f64],
        h: f64,
        y_out: &mut [f64],
        err: Option<&mut [f64]>,
    ) -> Result<()> {
        let n = y.len();
        if !self.k1_valid {
            f.eval(t, y, &mut self.k[0])?;
            self.evals += 1;
            self.k1_valid = true;
        }
        for s in 1..8 {
            let a = A[s];
            for i in 0..n {
                let mut acc = 0.0;
                for (j, &aj) in a.iter().enumerate() {
                    if aj != 0.0 {
                        acc += aj * self.k[j][i];
                    }
                }
                self.tmp[i] = y[i] + h * acc;
            }
            if s == 7 {
                y_out.copy_from_slice(&self.tmp);
            }
            f.eval(t + C[s] * h, &self.tmp, &mut self.k[s])?;
            self.evals += 1;
        }
        if let Some(err) = err {
            for i in 0..n {
                let mut acc = 0.0;
                for s in 0..8 {
                    acc += (B[s] - B_HAT[s]) * self.k[s][i];
                }
                err[i] = h * acc;
            }
        }
        Ok(())
    }

    /// Promote the last stage to the first stage of the next step.
    pub fn accept(&mut self) {
        self.k.swap(0, 7);
        self.k1_valid = true;
    }

    /// Derivative at the start of the pending step (valid after `try_step`).
    pub fn first_stage(&self) -> &[f64] {
        &self.k[0]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

/// Root-mean-square scaled error.
pub fn error_norm(err: &[f64], y0: &[f64], y1: &[f64], tol: Tolerance) -> f64 {
    let n = err.len().max(1) as f64;
    let s: f64 = err
        .iter()
        .zip(y0.iter().zip(y1))
        .map(|(e, (a, b))| {
            let sc = tol.atol + tol.rtol * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum();
    (s / n).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepControl {
    Fixed(f64),
    Adaptive(Tolerance),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
}

/// Integrator that keeps the step size and stage cache between calls.
#[derive(Clone, Debug)]
pub struct Integrator {
    pub stepper: Stepper,
    pub control: StepControl,
    pub h: Option<f64>,
    pub h_max: f64,
    pub stats: Stats,
    y_new: Vec<f64>,
    err: Vec<f64>,
}

impl Integrator {
    pub fn new(n: usize, control: StepControl) -> Self {
        Integrator {
            stepper: Stepper::new(n),
            control,
            h: None,
            h_max: f64::INFINITY,
            stats: Stats::default(),
            y_new: vec![0.0; n],
            err: vec![0.0; n],
        }
    }

    fn initial_step<F: Rhs>(&mut self, f: &mut F, t: f64, y: &[f64], tol: Tolerance) -> Result<f64> {
        let mut dy = vec![0.0; y.len()];
        f.eval(t, y, &mut dy)?;
        let zeros = vec![0.0; y.len()];
        let d0 = error_norm(y, &zeros, y, tol);
        let d1 = error_norm(&dy, &zeros, y, tol);
        let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        Ok(h.min(self.h_max))
    }

    /// Advance `y` from `t` to exactly `t_end`.
    pub fn advance<F: Rhs>(&mut self, f: &mut F, t: &mut f64, y: &mut [f64], t_end: f64) -> Result<()> {
        match self.control {
            StepControl::Fixed(dt) => {
                let span = t_end - *t;
                if span <= 0.0 {
                    return Ok(());
                }
                let n = ((span / dt) - 1e-9).ceil().max(1.0) as usize;
                let h = span / n as f64;
                let t0 = *t;
                for i in 0..n {
                    let ti = t0 + i as f64 * h;
                    self.stepper.try_step(f, ti, y, h, &mut self.y_new, None)?;
                    check_finite(&self.y_new, ti + h)?;
                    y.copy_from_slice(&self.y_new);
                    self.stepper.accept();
                    self.stats.accepted += 1;
                }
                *t = t_end;
                Ok(())
            }
            StepControl::Adaptive(tol) => {
                let mut h = match self.h {
                    Some(h) => h,
                    None => self.initial_step(f, *t, y, tol)?,
                };
                while *t < t_end {
                    let remaining = t_end - *t;
                    if remaining <= 1e-14 * t.abs().max(1.0) {
                        // roundoff-sized gap
                        *t = t_end;
                        break;
                    }
                    let last = h >= remaining * (1.0 - 1e-12);
                    let hs = if last { remaining } else { h };
                    if hs < 1e-14 * t.abs().max(1.0) {
                        return Err(Error::StepUnderflow { t: *t, dt: hs });
                    }
                    self.stepper
                        .try_step(f, *t, y, hs, &mut self.y_new, Some(&mut self.err))?;
                    let en = error_norm(&self.err, y, &self.y_new, tol);
                    let finite = en.is_finite() && self.y_new.iter().all(|v| v.is_finite());
                    if finite && en <= 1.0 {
                        *t = if last { t_end } else { *t + hs };
                        y.copy_from_slice(&self.y_new);
                        self.stepper.accept();
                        self.stats.accepted += 1;
                        let fac = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
                        // a truncated final step does not shrink the carried step size
                        h = if last { h.max(hs * fac).min(self.h_max) } else { (hs * fac).min(self.h_max) };
                    } else {
                        self.stats.rejected += 1;
                        let fac = if finite { (0.9 * en.powf(-0.2)).clamp(0.1, 0.9) } else { 0.25 };
                        h = hs * fac;
                    }
                }
                self.h = Some(h);
                Ok(())
            }
        }
    }
}

fn check_finite(y: &[f64], t: f64) -> Result<()> {
    if y.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { t })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tableau_row_sums() {
        for s in 1..8 {
            let sum: f64 = A[s].iter().sum();
            assert!((sum - C[s]).abs() < 1e-14, "row {s}");
        }
        assert!((B.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((B_HAT.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        // fifth-order quadrature conditions sum b_i c_i^(q-1) = 1/q
        for q in 1..=5 {
            let s: f64 = (0..8).map(|i| B[i] * C[i].powi(q - 1)).sum();
            assert!((s - 1.0 / q as f64).abs() < 1e-14, "q={q}");
        }
    }

    #[test]
    fn fifth_order_convergence() {
        // y' = -y + sin t
        let mut f = |t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
            dy[0] = -y[0] + t.sin();
            Ok(())
        };
        let exact = |t: f64| 0.5 * (t.sin() - t.cos()) + 1.5 * (-t).exp();
        let mut errs = vec![];
        for n in [3usize, 6, 12] {
            let mut it = Integrator::new(1, StepControl::Fixed(2.0 / n as f64));
            let mut y = [1.0];
            let mut t = 0.0;
            it.advance(&mut f, &mut t, &mut y, 2.0).unwrap();
            errs.push((y[0] - exact(2.0)).abs());
        }
        for w in errs.windows(2) {
            let rate = (w[0] / w[1]).log2();
            assert!(rate > 4.5, "rate {rate} {errs:?}");
        }
    }

    #[test]
    fn adaptive_hits_end_and_tolerance() {
        let mut f = |_t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
            dy[0] = y[1];
            dy[1] = -y[0];
            Ok(())
        };
        let mut it = Integrator::new(2, StepControl::Adaptive(Tolerance { rtol: 1e-10, atol: 1e-12 }));
        let mut y = [1.0, 0.0];
        let mut t = 0.0;
        for &te in &[1.0, 3.3, 10.0] {
            it.advance(&mut f, &mut t, &mut y, te).unwrap();
            assert_eq!(t, te);
            assert!((y[0] - te.cos()).abs() < 1e-8);
        }
    }
}
