use swhomog::coefficients::HomogenizedCoefficients;
use swhomog::traveling_wave::*;
use swhomog::unit_cell::PeriodicProfile;

fn scen_a() -> HomogenizedCoefficients {
    HomogenizedCoefficients::compute(&PeriodicProfile::two_layer(1.0, 0.3), 9.81).unwrap()
}

#[test]
fn profile_does_not_depend_on_window() {
    let c = scen_a();
    let v = 1.02 * c.c;
    let k = gammas(&c, v, 1.0);
    let w = XiWindow::default_for(&k).unwrap();
    let a = solitary_wave_o3(&c, v, 1.0, Some(w)).unwrap();
    let b = solitary_wave_o3(
        &c,
        v,
        1.0,
        Some(XiWindow {
            half_length: 0.7 * w.half_length,
            spacing: 0.5 * w.spacing,
        }),
    )
    .unwrap();
    assert!((a.amplitude() - b.amplitude()).abs() < 1e-10 * a.amplitude());
    for xi in [-7.3, -1.0, 0.4, 5.5] {
        assert!((a.eval(xi) - b.eval(xi)).abs() < 1e-8 * a.amplitude(), "{xi}");
    }
}

#[test]
fn profile_is_even_single_hump() {
    let c = scen_a();
    let w = solitary_wave_o3(&c, 1.03 * c.c, 1.0, None).unwrap();
    let n = w.eta.len();
    let peak = w.eta.iter().enumerate().fold(0, |m, (i, &e)| if e > w.eta[m] { i } else { m });
    assert_eq!(peak, n / 2);
    for i in 0..n / 2 {
        assert!((w.eta[i] - w.eta[n - 1 - i]).abs() < 1e-9 * w.amplitude());
        assert!(w.eta[i + 1] >= w.eta[i]);
    }
    assert_eq!(w.q()[peak], w.v * w.eta[peak]);
}

#[test]
fn speed_amplitude_round_trip() {
    let c = scen_a();
    for order in [3u8, 5] {
        let v = 1.025 * c.c;
        let w3 = solitary_wave_o3(&c, v, 1.0, None).unwrap();
        let a = if order == 3 { w3.amplitude() } else { solitary_wave_o5(&c, v, 1.0, &w3).unwrap().amplitude() };
        let back = speed_for_amplitude(&c, 1.0, a, order).unwrap();
        assert!((back / v - 1.0).abs() < 1e-7, "order {order}: {back} vs {v}");
    }
}

#[test]
fn faster_waves_are_taller() {
    let c = scen_a();
    let amps: Vec<f64> = [1.01, 1.02, 1.03, 1.04]
        .iter()
        .map(|r| solitary_wave_o3(&c, r * c.c, 1.0, None).unwrap().amplitude())
        .collect();
    assert!(amps.windows(2).all(|w| w[1] > w[0]), "{amps:?}");
}

#[test]
fn subcritical_and_flat_are_rejected() {
    let c = scen_a();
    assert!(solitary_wave_o3(&c, 0.99 * c.c, 1.0, None).is_err());
    let flat = HomogenizedCoefficients::compute(&PeriodicProfile::flat(1.0), 9.81).unwrap();
    assert!(solitary_wave_o3(&flat, 1.02 * flat.c, 1.0, None).is_err());
    assert!(speed_for_amplitude(&c, 1.0, -0.01, 3).is_err());
}
