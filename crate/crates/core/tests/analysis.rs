
use diractime::analysis::{bohr_check, extract_frequency, linear_fit, uncertainty_th, uncertainty_xp};
use diractime::dynamics::{ObservableTrace, Parameter};
use diractime::grid::gaussian_packet;
use diractime::verify;
use diractime::{DiracSystem, GridSpec, C64};
use proptest::prelude::*;

fn synthetic(omega: f64, drift: f64, n: usize, span: f64) -> ObservableTrace {
    let samples = (0..n)
        .map(|k| {
            let t = span * k as f64 / (n - 1) as f64;
            (t, 0.3 + drift * t + 0.01 * (omega * t).sin())
        })
        .collect();
    ObservableTrace {
        name: "x_0".into(),
        parameter: Parameter::Time,
        samples,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn recovers_synthetic_frequency(omega in 1.0f64..6.0, drift in -0.2f64..0.2) {
        let est = extract_frequency(&synthetic(omega, drift, 512, 40.0)).unwrap();
        prop_assert!((est.angular_frequency / omega - 1.0).abs() < 5e-3);
    }

    #[test]
    fn superpositions_respect_xp_bound(a in -4.0f64..4.0, w in 2.0f64..5.0, k in -0.5f64..0.5) {
        let g = GridSpec::new(1, 512, 120.0).unwrap();
        let f1 = gaussian_packet(g, &[a], w, &[k], &[C64::new(1.0, 0.0)]);
        let f2 = gaussian_packet(g, &[-a], 0.8 * w, &[0.0], &[C64::new(1.0, 0.0)]);
        let f = f1.add_scaled(C64::new(0.6, 0.2), &f2).normalized();
        let u = uncertainty_xp(&f).unwrap()[0];
        prop_assert!(u.product >= 0.5 - 1e-12);
        prop_assert!(u.product >= u.robertson_bound - 1e-12);
    }
}

#[test]
fn linear_fit_is_exact_on_lines() {
    let t: Vec<f64> = (0..10).map(|k| k as f64).collect();
    let y: Vec<f64> = t.iter().map(|x| 2.0 - 0.5 * x).collect();
    let (a, b) = linear_fit(&t, &y);
    assert!((a - 2.0).abs() < 1e-12 && (b + 0.5).abs() < 1e-12);
}

#[test]
fn short_traces_are_rejected() {
    assert!(extract_frequency(&synthetic(2.0, 0.0, 16, 10.0)).is_err());
}

#[test]
fn gaussian_saturates_and_width_scales() {
    let g = GridSpec::new(1, 1024, 200.0).unwrap();
    for w in [3.0, 6.0] {
        let f = gaussian_packet(g, &[0.0], w, &[0.2], &[C64::new(1.0, 0.0)]);
        let u = uncertainty_xp(&f).unwrap()[0];
        assert!((u.product - 0.5).abs() < 1e-9);
        assert!((u.delta_x - w / 2f64.sqrt()).abs() < 1e-9);
    }
}

#[test]
fn time_energy_relation_on_rest_state() {
    let sys = DiracSystem::new(3, 1.0).unwrap();
    let f = verify::rest_gaussian_3d(1.0, 0.0).unwrap();
    let th = uncertainty_th(&sys, &f).unwrap();
    assert!(th.pass);
    assert!(th.product >= th.commutator_bound * (1.0 - 1e-9));
    let b = bohr_check(&sys, &f).unwrap();
    assert!(b.pass_time && b.pass_energy && b.pass_product);
}

#[test]
fn time_energy_needs_three_dimensions() {
    let sys = DiracSystem::new(1, 1.0).unwrap();
    let g = GridSpec::new(1, 256, 100.0).unwrap();
    let f = gaussian_packet(g, &[0.0], 5.0, &[0.0], &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
    assert!(uncertainty_th(&sys, &f).is_err());
}
