use crate::error::{Error, Result};
use crate::unit_cell::grid::CellGrid;
use crate::unit_cell::CellFunction;

const BREAK_TOL: f64 = 1e-13;

/// Exact piecewise-polynomial function on the unit cell.
///
/// Segment `i` covers `[breaks[i], breaks[i+1])` and stores the coefficients of
/// a polynomial in the local variable `t = y - breaks[i]`, lowest degree first.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewisePolynomial {
    breaks: Vec<f64>,
    pieces: Vec<Vec<f64>>,
}

fn horner(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * t + a)
}

/// Coefficients of `p(t + a)` given those of `p(t)`.
fn taylor_shift(c: &[f64], a: f64) -> Vec<f64> {
    let mut c = c.to_vec();
    let n = c.len();
    if a == 0.0 || n < 2 {
        return c;
    }
    for k in 0..n - 1 {
        for j in (k..n - 1).rev() {
            c[j] += a * c[j + 1];
        }
    }
    c
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return vec![0.0];
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_integral(c: &[f64], w: f64) -> f64 {
    let mut s = 0.0;
    let mut wp = w;
    for (k, &a) in c.iter().enumerate() {
        s += a * wp / (k as f64 + 1.0);
        wp *= w;
    }
    s
}

impl PiecewisePolynomial {
    pub fn new(breaks: Vec<f64>, pieces: Vec<Vec<f64>>) -> Result<Self> {
        if breaks.len() < 2 || pieces.len() + 1 != breaks.len() {
            return Err(Error::InvalidProfile(
                "piecewise polynomial needs one piece per segment".into(),
            ));
        }
        if breaks[0].abs() > BREAK_TOL || (breaks[breaks.len() - 1] - 1.0).abs() > BREAK_TOL {
            return Err(Error::InvalidProfile("breaks must span [0, 1]".into()));
        }
        if breaks.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidProfile("breaks must be strictly increasing".into()));
        }
        if pieces.iter().any(|p| p.is_empty() || p.iter().any(|v| !v.is_finite())) {
            return Err(Error::InvalidProfile("piece coefficients must be finite".into()));
        }
        Ok(PiecewisePolynomial { breaks, pieces })
    }

    pub fn constant(c: f64) -> Self {
        PiecewisePolynomial {
            breaks: vec![0.0, 1.0],
            pieces: vec![vec![c]],
        }
    }

    /// Piecewise-constant function: segment `i` ends at `right_ends[i]` and has value `values[i]`.
    pub fn piecewise_constant(right_ends: &[f64], values: &[f64]) -> Result<Self> {
        if right_ends.len() != values.len() || values.is_empty() {
            return Err(Error::InvalidProfile(
                "breakpoints and values must have equal nonzero length".into(),
            ));
        }
        let mut breaks = Vec::with_capacity(values.len() + 1);
        breaks.push(0.0);
        breaks.extend_from_slice(right_ends);
        Self::new(breaks, values.iter().map(|&v| vec![v]).collect())
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn pieces(&self) -> &[Vec<f64>] {
        &self.pieces
    }

    pub fn segments(&self) -> usize {
        self.pieces.len()
    }

    pub fn degree(&self) -> usize {
        self.pieces.iter().map(|p| p.len() - 1).max().unwrap_or(0)
    }

    fn width(&self, i: usize) -> f64 {
        self.breaks[i + 1] - self.breaks[i]
    }

    fn segment_of(&self, y: f64) -> usize {
        let s = self.segments();
        match self
            .breaks
            .binary_search_by(|b| b.partial_cmp(&y).unwrap_or(std::cmp::Ordering::Less))
        {
            Ok(i) => i.min(s - 1),
            Err(i) => i.saturating_sub(1).min(s - 1),
        }
    }

    /// Re-express on a finer set of breaks (must contain all current breaks).
    pub fn refine(&self, breaks: &[f64]) -> Self {
        let mut pieces = Vec::with_capacity(breaks.len() - 1);
        for w in breaks.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let i = self.segment_of(mid);
            pieces.push(taylor_shift(&self.pieces[i], w[0] - self.breaks[i]));
        }
        PiecewisePolynomial {
            breaks: breaks.to_vec(),
            pieces,
        }
    }

    fn common_breaks(&self, other: &Self) -> Vec<f64> {
        let mut all: Vec<f64> = self.breaks.iter().chain(&other.breaks).copied().collect();
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut out: Vec<f64> = Vec::with_capacity(all.len());
        for b in all {
            if out.last().map_or(true, |&l| b - l > BREAK_TOL) {
                out.push(b);
            }
        }
        if let Some(last) = out.last_mut() {
            *last = 1.0;
        }
        out
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&[f64], &[f64]) -> Vec<f64>) -> Self {
        if self.breaks == other.breaks {
            let pieces = self
                .pieces
                .iter()
                .zip(&other.pieces)
                .map(|(a, b)| f(a, b))
                .collect();
            return PiecewisePolynomial {
                breaks: self.breaks.clone(),
                pieces,
            };
        }
        let br = self.common_breaks(other);
        self.refine(&br).zip_with(&other.refine(&br), f)
    }

    /// Antiderivative vanishing at `y = 0`, continuous across breaks.
    pub fn antiderivative(&self) -> Self {
        let mut acc = 0.0;
        let mut pieces = Vec::with_capacity(self.segments());
        for (i, p) in self.pieces.iter().enumerate() {
            let mut q = Vec::with_capacity(p.len() + 1);
            q.push(acc);
            for (k, &a) in p.iter().enumerate() {
                q.push(a / (k as f64 + 1.0));
            }
            acc += poly_integral(p, self.width(i));
            pieces.push(q);
        }
        PiecewisePolynomial {
            breaks: self.breaks.clone(),
            pieces,
        }
    }

    pub fn add_constant(&self, c: f64) -> Self {
        let mut out = self.clone();
        for p in &mut out.pieces {
            p[0] += c;
        }
        out
    }

    pub fn map_pieces(&self, f: impl Fn(usize, &[f64]) -> Vec<f64>) -> Self {
        PiecewisePolynomial {
            breaks: self.breaks.clone(),
            pieces: self.pieces.iter().enumerate().map(|(i, p)| f(i, p)).collect(),
        }
    }

    pub fn powi(&self, k: u32) -> Self {
        let mut out = PiecewisePolynomial::constant(1.0);
        for _ in 0..k {
            out = out.zip_with(self, poly_mul);
        }
        out
    }

    /// Piecewise derivative; jumps between segments are ignored.
    pub fn derivative(&self) -> Self {
        self.map_pieces(|_, p| {
            if p.len() < 2 {
                return vec![0.0];
            }
            p.iter().enumerate().skip(1).map(|(k, &a)| k as f64 * a).collect()
        })
    }

    /// Shifted copy: result(y) = f(y - sigma).
    pub fn shift(&self, sigma: f64) -> Self {
        let sigma = sigma.rem_euclid(1.0);
        let mut br: Vec<f64> = self.breaks[..self.segments()]
            .iter()
            .map(|&b| (b + sigma).rem_euclid(1.0))
            .collect();
        br.push(0.0);
        br.push(1.0);
        br.sort_by(|a, b| a.partial_cmp(b).unwrap());
        br.dedup_by(|a, b| (*a - *b).abs() <= BREAK_TOL);
        if let Some(last) = br.last_mut() {
            *last = 1.0;
        }
        let mut pieces = Vec::with_capacity(br.len() - 1);
        for w in br.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let src_mid = (mid - sigma).rem_euclid(1.0);
            let i = self.segment_of(src_mid);
            let src_start = src_mid - (mid - w[0]);
            pieces.push(taylor_shift(&self.pieces[i], src_start - self.breaks[i]));
        }
        PiecewisePolynomial { breaks: br, pieces }
    }

    /// Samples on the uniform grid `y_i = i/n`.
    pub fn sample(&self, n: usize) -> Result<CellGrid> {
        CellGrid::from_fn(n, |y| self.eval(y))
    }
}

impl CellFunction for PiecewisePolynomial {
    fn mean(&self) -> f64 {
        self.pieces
            .iter()
            .enumerate()
            .map(|(i, p)| poly_integral(p, self.width(i)))
            .sum()
    }

    fn fluctuation(&self) -> Self {
        self.add_constant(-self.mean())
    }

    fn bracket(&self) -> Self {
        let g = self.fluctuation().antiderivative();
        g.add_constant(-g.mean())
    }

    fn mul(&self, other: &Self) -> Result<Self> {
        Ok(self.zip_with(other, poly_mul))
    }

    fn add(&self, other: &Self) -> Result<Self> {
        Ok(self.zip_with(other, |a, b| {
            let n = a.len().max(b.len());
            (0..n)
                .map(|k| a.get(k).copied().unwrap_or(0.0) + b.get(k).copied().unwrap_or(0.0))
                .collect()
        }))
    }

    fn scale(&self, s: f64) -> Self {
        self.map_pieces(|_, p| p.iter().map(|v| v * s).collect())
    }

    fn eval(&self, y: f64) -> f64 {
        let y = y.rem_euclid(1.0);
        let i = self.segment_of(y);
        horner(&self.pieces[i], y - self.breaks[i])
    }
}
