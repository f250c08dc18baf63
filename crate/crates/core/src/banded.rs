//! Banded LU factorization with partial pivoting.

use crate::error::{Error, Result};

/// Square matrix with `kl` sub-diagonals and `ku` super-diagonals.
///
/// Storage is row-major over a window of width `kl + ku + kl + 1` so that
/// pivoting fill-in (up to `kl` extra super-diagonals) fits.
#[derive(Clone, Debug)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandMatrix {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        // column j stored at offset j + kl - i within row i
        i * self.width + (j + self.kl - i)
    }

    #[inline]
    fn in_band(&self, i: usize, j: usize) -> bool {
        j + self.kl >= i && j <= i + self.ku + self.kl
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) && j < self.n {
            self.data[self.idx(i, j)]
        } else {
            0.0
        }
    }

    /// Set an entry inside the original band.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(j + self.kl >= i && j <= i + self.ku && j < self.n, "entry ({i},{j}) outside band");
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let cur = self.get(i, j);
        self.set(i, j, cur + v);
    }

    pub fn clear_row(&mut self, i: usize) {
        let s = i * self.width;
        self.data[s..s + self.width].iter_mut().for_each(|v| *v = 0.0);
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku + self.kl).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// Solve `A x = b` in place, destroying the matrix.
    pub fn solve_in_place(mut self, b: &mut [f64]) -> Result<()> {
        let n = self.n;
        let kl = self.kl;
        let umax = self.ku + self.kl;
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return Err(Error::Singular);
        }
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut pv = self.get(k, k).abs();
            for i in k + 1..=last {
                let v = self.get(i, k).abs();
                if v > pv {
                    pv = v;
                    p = i;
                }
            }
            if pv <= f64::MIN_POSITIVE * scale || !pv.is_finite() {
                return Err(Error::Singular);
            }
            let jmax = (k + umax).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let a = self.get(k, j);
                    let c = self.get(p, j);
                    let ik = self.idx(k, j);
                    self.data[ik] = c;
                    let ip = self.idx(p, j);
                    self.data[ip] = a;
                }
                b.swap(k, p);
            }
            let piv = self.get(k, k);
            for i in k + 1..=last {
                let f = self.get(i, k) / piv;
                if f == 0.0 {
                    continue;
                }
                let ii = self.idx(i, k);
                self.data[ii] = 0.0;
                for j in k + 1..=jmax {
                    let v = self.get(k, j);
                    if v != 0.0 {
                        let ij = self.idx(i, j);
                        self.data[ij] -= f * v;
                    }
                }
                b[i] -= f * b[k];
            }
        }
        for k in (0..n).rev() {
            let jmax = (k + umax).min(n - 1);
            let mut s = b[k];
            for j in k + 1..=jmax {
                s -= self.get(k, j) * b[j];
            }
            b[k] = s / self.get(k, k);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn solves_random_pentadiagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 50;
        let mut a = BandMatrix::zeros(n, 2, 2);
        for i in 0..n {
            for j in i.saturating_sub(2)..=(i + 2).min(n - 1) {
                a.set(i, j, rng.gen_range(-1.0..1.0));
            }
        }
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut b = a.mul_vec(&x);
        a.solve_in_place(&mut b).unwrap();
        for i in 0..n {
            assert!((b[i] - x[i]).abs() < 1e-9, "{i}: {} vs {}", b[i], x[i]);
        }
    }

    #[test]
    fn needs_pivoting() {
        let mut a = BandMatrix::zeros(3, 1, 1);
        a.set(0, 0, 0.0);
        a.set(0, 1, 1.0);
        a.set(1, 0, 1.0);
        a.set(1, 1, 0.0);
        a.set(1, 2, 1.0);
        a.set(2, 1, 1.0);
        a.set(2, 2, 1.0);
        let mut b = vec![2.0, 4.0, 5.0];
        a.solve_in_place(&mut b).unwrap();
        // x = (1, 2, 3)
        assert!((b[0] - 1.0).abs() < 1e-14 && (b[1] - 2.0).abs() < 1e-14 && (b[2] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn singular_detected() {
        let a = BandMatrix::zeros(4, 1, 1);
        let mut b = vec![1.0; 4];
        assert!(matches!(a.solve_in_place(&mut b), Err(Error::Singular)));
    }
}
