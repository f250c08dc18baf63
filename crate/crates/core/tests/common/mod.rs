//! Oracles shared by the integration test targets.
#![allow(dead_code)]

use swhomog::swe_reference::{run_reference, FvConfig, FvState};
use swhomog::unit_cell::PeriodicProfile;

pub const G: f64 = 9.81;

/// Exact flat-bottom Riemann solution (both sides wet, no dry region).
pub struct Riemann {
    pub hl: f64,
    pub ul: f64,
    pub hr: f64,
    pub ur: f64,
    pub hs: f64,
    pub us: f64,
}

/// Wave curve through state depth `hk` evaluated at `h`, with derivative.
fn curve(h: f64, hk: f64) -> (f64, f64) {
    if h > hk {
        let s = (0.5 * G * (h + hk) / (h * hk)).sqrt();
        let ds = -0.25 * G / (h * h * s);
        ((h - hk) * s, s + (h - hk) * ds)
    } else {
        let c = (G * h).sqrt();
        (2.0 * (c - (G * hk).sqrt()), G / c)
    }
}

impl Riemann {
    pub fn new(hl: f64, ul: f64, hr: f64, ur: f64) -> Self {
        let mut h = 0.5 * (hl + hr);
        for _ in 0..100 {
            let (fl, dl) = curve(h, hl);
            let (fr, dr) = curve(h, hr);
            let step = (fl + fr + ur - ul) / (dl + dr);
            h -= step;
            if step.abs() < 1e-15 * h {
                break;
            }
        }
        let us = 0.5 * (ul + ur) + 0.5 * (curve(h, hr).0 - curve(h, hl).0);
        Riemann { hl, ul, hr, ur, hs: h, us }
    }

    /// `(h, u)` at `s = x / t`.
    pub fn sample(&self, s: f64) -> (f64, f64) {
        let cs = (G * self.hs).sqrt();
        if s <= self.us {
            let cl = (G * self.hl).sqrt();
            if self.hs > self.hl {
                let speed = self.ul - (0.5 * G * self.hs * (self.hs + self.hl) / self.hl).sqrt();
                return if s < speed { (self.hl, self.ul) } else { (self.hs, self.us) };
            }
            if s < self.ul - cl {
                (self.hl, self.ul)
            } else if s > self.us - cs {
                (self.hs, self.us)
            } else {
                let c = (self.ul + 2.0 * cl - s) / 3.0;
                (c * c / G, (self.ul + 2.0 * cl + 2.0 * s) / 3.0)
            }
        } else {
            let cr = (G * self.hr).sqrt();
            if self.hs > self.hr {
                let speed = self.ur + (0.5 * G * self.hs * (self.hs + self.hr) / self.hr).sqrt();
                return if s > speed { (self.hr, self.ur) } else { (self.hs, self.us) };
            }
            if s > self.ur + cr {
                (self.hr, self.ur)
            } else if s < self.us + cs {
                (self.hs, self.us)
            } else {
                let c = (-self.ur + 2.0 * cr + s) / 3.0;
                (c * c / G, (self.ur - 2.0 * cr + 2.0 * s) / 3.0)
            }
        }
    }
}

/// L1 distance between a finite-volume dam break (depths 1.0 | 0.5 at x = 10 on [0, 20])
/// and the exact solution at t = 1.
pub fn dam_break_error(cpp: usize, config: FvConfig) -> f64 {
    let (x0, t) = (10.0, 1.0);
    let r = Riemann::new(1.0, 0.0, 0.5, 0.0);
    let mut st = FvState::at_rest(&PeriodicProfile::flat(1.0), 1.0, 0.0, 20.0, cpp).unwrap();
    let x = st.x();
    for (i, &xi) in x.iter().enumerate() {
        st.eta[i] = if xi < x0 { 0.0 } else { -0.5 };
    }
    let run = run_reference(config, st, -10.0, &[t]).unwrap();
    let dx = 1.0 / cpp as f64;
    run.snapshots[0]
        .h
        .iter()
        .zip(&x)
        .map(|(h, &xi)| (h - r.sample((xi - x0) / t).0).abs() * dx)
        .sum()
}
