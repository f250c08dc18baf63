//! Homogenized solver against analytic oracles.

use swhomog::coefficients::HomogenizedCoefficients;
use swhomog::homogenized_solver::*;
use swhomog::unit_cell::PeriodicProfile;

fn scen_a() -> HomogenizedCoefficients {
    HomogenizedCoefficients::compute(&PeriodicProfile::two_layer(1.0, 0.3), 9.81).unwrap()
}

fn run(coeffs: &HomogenizedCoefficients, cfg: SolverConfig, l: f64, m: usize, init: &FieldState, t: &[f64]) -> Simulation {
    HomogenizedSolver::new(coeffs, cfg, l, m).unwrap().simulate(init, t).unwrap()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn flat_bottom_small_pulse_is_dalembert() {
    // no dispersion on a flat bottom; tiny amplitude keeps the nonlinearity below the check
    let h0 = 0.7;
    let coeffs = HomogenizedCoefficients::compute(&PeriodicProfile::flat(h0), 9.81).unwrap();
    let c = coeffs.c;
    assert!((c - (9.81 * h0).sqrt()).abs() < 1e-14);
    let amp = 1e-6;
    let f = |x: f64| amp * (-(x * x) / 4.0).exp();
    let init = FieldState::from_fn(40.0, 1024, f, |_| 0.0).unwrap();
    let t = 6.0;
    for order in [3, 5] {
        let mut cfg = SolverConfig::new(order, 1.0, t);
        cfg.dt_control = TimeStepping::Adaptive { rtol: 1e-10, atol: 1e-18 };
        let sim = run(&coeffs, cfg, 40.0, 1024, &init, &[t]);
        let s = &sim.snapshots[0];
        let exact: Vec<f64> = s.x.iter().map(|&x| 0.5 * (f(x - c * t) + f(x + c * t))).collect();
        let err = max_diff(&s.eta, &exact) / amp;
        assert!(err < 1e-4, "order {order}: {err}");
    }
}

#[test]
fn fixed_step_converges_at_high_order() {
    let coeffs = scen_a();
    let init = FieldState::from_fn(60.0, 512, |x| 0.02 * (-(x * x) / 9.0).exp(), |_| 0.0).unwrap();
    let t = 4.0;
    let at = |dt: f64| {
        let mut cfg = SolverConfig::new(5, 1.0, t);
        cfg.dt_control = TimeStepping::Fixed { dt };
        run(&coeffs, cfg, 60.0, 512, &init, &[t]).snapshots[0].eta.clone()
    };
    let (a, b, c) = (at(0.04), at(0.02), at(0.01));
    let ratio = max_diff(&a, &b) / max_diff(&b, &c);
    assert!(ratio > 12.0, "{ratio}");
}

#[test]
fn grid_refinement_is_spectral() {
    let coeffs = scen_a();
    let t = 8.0;
    let field = |m: usize| {
        let init = FieldState::from_fn(60.0, m, |x| 0.025 * (-(x * x) / 9.0).exp(), |_| 0.0).unwrap();
        let mut cfg = SolverConfig::new(5, 1.0, t);
        cfg.dt_control = TimeStepping::Adaptive { rtol: 1e-10, atol: 1e-13 };
        run(&coeffs, cfg, 60.0, m, &init, &[t]).snapshots[0].eta.clone()
    };
    let (a, b, c) = (field(256), field(512), field(1024));
    // compare on the coarse grid
    let e1 = (0..256).map(|j| (a[j] - b[2 * j]).abs()).fold(0.0, f64::max);
    let e2 = (0..256).map(|j| (a[j] - c[4 * j]).abs()).fold(0.0, f64::max);
    let e3 = (0..512).map(|j| (b[j] - c[2 * j]).abs()).fold(0.0, f64::max);
    assert!(e3 < 1e-2 * e1 && e3 < 1e-8, "{e1} {e2} {e3}");
}

#[test]
fn mass_is_conserved() {
    let coeffs = scen_a();
    let init = FieldState::from_fn(100.0, 1024, |x| 0.025 * (-(x * x) / 9.0).exp(), |_| 0.0).unwrap();
    for order in [3, 4, 5] {
        let sim = run(&coeffs, SolverConfig::new(order, 1.0, 20.0), 100.0, 1024, &init, &[5.0, 20.0]);
        assert!(sim.max_mass_drift < 1e-12, "order {order}: {}", sim.max_mass_drift);
    }
}

#[test]
fn even_initial_data_stays_even() {
    let coeffs = scen_a();
    let m = 512;
    let init = FieldState::from_fn(50.0, m, |x| 0.02 * (-(x * x) / 4.0).exp(), |_| 0.0).unwrap();
    let sim = run(&coeffs, SolverConfig::new(5, 1.0, 6.0), 50.0, m, &init, &[6.0]);
    let e = &sim.snapshots[0].eta;
    // x_j = -L + 2Lj/M, so x_{M-j} = -x_j
    let asym = (1..m).map(|j| (e[j] - e[m - j]).abs()).fold(0.0, f64::max);
    assert!(asym < 1e-13, "{asym}");
}

#[test]
fn rejects_bad_configuration() {
    let coeffs = scen_a();
    assert!(HomogenizedSolver::new(&coeffs, SolverConfig::new(6, 1.0, 1.0), 10.0, 64).is_err());
    assert!(HomogenizedSolver::new(&coeffs, SolverConfig::new(3, 0.0, 1.0), 10.0, 64).is_err());
    assert!(HomogenizedSolver::new(&coeffs, SolverConfig::new(3, 1.0, 1.0), 10.0, 100).is_err());
    let mut cfg = SolverConfig::new(3, 1.0, 1.0);
    cfg.dt_control = TimeStepping::Fixed { dt: -1.0 };
    assert!(HomogenizedSolver::new(&coeffs, cfg, 10.0, 64).is_err());
}
