//! Fourier machinery for uniform periodic grids.
//!
//! Two real signals are transformed with a single complex FFT by packing them
//! as `a + i b`; spectra of real signals are Hermitian so they can be split
//! (forward) or recombined (inverse) without extra transforms.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// Signed integer mode index for FFT slot `j` of an `n`-point transform.
/// The Nyquist slot maps to `0` so that it is dropped by every derivative.
#[inline]
pub fn mode_index(j: usize, n: usize) -> f64 {
    if j < n / 2 {
        j as f64
    } else if j == n / 2 {
        0.0
    } else {
        j as f64 - n as f64
    }
}

/// Angular wavenumbers for an `n`-point grid on a period of length `period`.
pub fn wavenumbers(n: usize, period: f64) -> Vec<f64> {
    let scale = 2.0 * PI / period;
    (0..n).map(|j| mode_index(j, n) * scale).collect()
}

/// Planned forward/inverse transform pair of a fixed size with its own scratch.
pub struct Transform {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl std::fmt::Debug for Transform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Transform").field("n", &self.n).finish()
    }
}

impl Clone for Transform {
    fn clone(&self) -> Self {
        Transform::new(self.n)
    }
}

impl Transform {
    pub fn new(n: usize) -> Self {
        let fwd = plan(n, false);
        let inv = plan(n, true);
        let len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        Transform {
            n,
            fwd,
            inv,
            scratch: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// In-place unnormalized forward transform.
    pub fn forward_inplace(&mut self, buf: &mut [Complex64]) {
        self.fwd.process_with_scratch(buf, &mut self.scratch);
    }

    /// In-place inverse transform including the `1/n` normalization.
    pub fn inverse_inplace(&mut self, buf: &mut [Complex64]) {
        self.inv.process_with_scratch(buf, &mut self.scratch);
        let s = 1.0 / self.n as f64;
        for v in buf.iter_mut() {
            *v *= s;
        }
    }

    /// Spectrum of a single real signal.
    pub fn forward_real(&mut self, x: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward_inplace(&mut buf);
        buf
    }

    /// Real part of the inverse transform of `spec`.
    pub fn inverse_real(&mut self, spec: &[Complex64]) -> Vec<f64> {
        let mut buf = spec.to_vec();
        self.inverse_inplace(&mut buf);
        buf.into_iter().map(|v| v.re).collect()
    }

    /// Spectra of two real signals from one complex transform.
    pub fn forward_pair(
        &mut self,
        a: &[f64],
        b: &[f64],
        out_a: &mut [Complex64],
        out_b: &mut [Complex64],
        work: &mut [Complex64],
    ) {
        let n = self.n;
        for j in 0..n {
            work[j] = Complex64::new(a[j], b[j]);
        }
        self.forward_inplace(work);
        for j in 0..n {
            let zj = work[j];
            let zc = work[(n - j) % n].conj();
            out_a[j] = 0.5 * (zj + zc);
            out_b[j] = Complex64::new(0.0, -0.5) * (zj - zc);
        }
    }

    /// Inverse of two Hermitian spectra into two real signals.
    pub fn inverse_pair(
        &mut self,
        spec_a: &[Complex64],
        spec_b: &[Complex64],
        out_a: &mut [f64],
        out_b: &mut [f64],
        work: &mut [Complex64],
    ) {
        let i = Complex64::new(0.0, 1.0);
        for j in 0..self.n {
            work[j] = spec_a[j] + i * spec_b[j];
        }
        self.inverse_inplace(work);
        for j in 0..self.n {
            out_a[j] = work[j].re;
            out_b[j] = work[j].im;
        }
    }
}

/// Spectral derivative of order `order` of a real periodic signal.
pub fn derivative(x: &[f64], period: f64, order: u32) -> Vec<f64> {
    let n = x.len();
    let mut t = Transform::new(n);
    let mut spec = t.forward_real(x);
    let k = wavenumbers(n, period);
    let i = Complex64::new(0.0, 1.0);
    for (s, &kj) in spec.iter_mut().zip(&k) {
        *s *= (i * kj).powu(order);
    }
    t.inverse_real(&spec)
}

/// Band-limited interpolation of a periodic signal onto `factor` times as many points.
pub fn upsample(x: &[f64], factor: usize) -> Vec<f64> {
    let n = x.len();
    let m = n * factor;
    let mut t = Transform::new(n);
    let spec = t.forward_real(x);
    let mut big = vec![Complex64::new(0.0, 0.0); m];
    for j in 0..n {
        let idx = mode_index(j, n);
        if j == n / 2 {
            // split the Nyquist coefficient symmetrically
            big[n / 2] += 0.5 * spec[j];
            big[m - n / 2] += 0.5 * spec[j];
            continue;
        }
        let slot = if idx >= 0.0 { idx as usize } else { (m as f64 + idx) as usize };
        big[slot] = spec[j];
    }
    let mut tb = Transform::new(m);
    tb.inverse_inplace(&mut big);
    big.into_iter().map(|v| v.re * factor as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_of_sine() {
        let n = 64;
        let x: Vec<f64> = (0..n)
            .map(|j| (2.0 * PI * 3.0 * j as f64 / n as f64).sin())
            .collect();
        let d = derivative(&x, 1.0, 1);
        for (j, v) in d.iter().enumerate() {
            let y = j as f64 / n as f64;
            let exact = 6.0 * PI * (6.0 * PI * y).cos();
            assert!((v - exact).abs() < 1e-10);
        }
    }

    #[test]
    fn pair_roundtrip() {
        let n = 32;
        let a: Vec<f64> = (0..n).map(|j| (j as f64 * 0.3).sin()).collect();
        let b: Vec<f64> = (0..n).map(|j| (j as f64 * 0.7).cos() + 1.0).collect();
        let mut t = Transform::new(n);
        let zero = Complex64::new(0.0, 0.0);
        let (mut sa, mut sb, mut w) = (vec![zero; n], vec![zero; n], vec![zero; n]);
        t.forward_pair(&a, &b, &mut sa, &mut sb, &mut w);
        let ra = t.forward_real(&a);
        for j in 0..n {
            assert!((sa[j] - ra[j]).norm() < 1e-12);
        }
        let (mut oa, mut ob) = (vec![0.0; n], vec![0.0; n]);
        t.inverse_pair(&sa, &sb, &mut oa, &mut ob, &mut w);
        for j in 0..n {
            assert!((oa[j] - a[j]).abs() < 1e-12);
            assert!((ob[j] - b[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn upsample_reproduces_band_limited() {
        let n = 32;
        let f = |y: f64| (2.0 * PI * y).cos() + 0.5 * (2.0 * PI * 5.0 * y).sin();
        let x: Vec<f64> = (0..n).map(|j| f(j as f64 / n as f64)).collect();
        let up = upsample(&x, 4);
        for (j, v) in up.iter().enumerate() {
            let y = j as f64 / (4 * n) as f64;
            assert!((v - f(y)).abs() < 1e-12);
        }
    }
}
