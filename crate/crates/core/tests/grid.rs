use diractime::grid::{apply_p, gaussian_packet, shift};
use diractime::{GridSpec, Representation, SpinorField, C64};
use proptest::prelude::*;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn field_from(g: GridSpec, s: usize, vals: &[(f64, f64)]) -> SpinorField {
    let data = (0..g.points() * s).map(|i| {
        let (a, b) = vals[i % vals.len()];
        C64::new(a, b) * (1.0 + (i as f64 * 0.37).sin())
    });
    SpinorField::from_data(g, s, Representation::Position, data.collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn parseval_and_round_trip_1d(vals in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..40),
                                  extent in 5.0f64..100.0) {
        let g = GridSpec::new(1, 64, extent).unwrap();
        let f = field_from(g, 2, &vals);
        let m = f.to_momentum().unwrap();
        let n2 = f.norm_sqr();
        prop_assert!((m.norm_sqr() - n2).abs() <= 1e-12 * n2);
        let back = m.to_position().unwrap();
        prop_assert!(back.distance(&f) <= 1e-12 * f.norm());
    }

    #[test]
    fn parseval_and_round_trip_3d(vals in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..40)) {
        let g = GridSpec::new(3, 8, 6.0).unwrap();
        let f = field_from(g, 4, &vals);
        let m = f.to_momentum().unwrap();
        let n2 = f.norm_sqr();
        prop_assert!((m.norm_sqr() - n2).abs() <= 1e-12 * n2);
        prop_assert!(m.to_position().unwrap().distance(&f) <= 1e-12 * f.norm());
    }

    #[test]
    fn lattice_shift_moves_samples(steps in -10i64..10, center in -3.0f64..3.0) {
        let g = GridSpec::new(1, 128, 60.0).unwrap();
        let f = gaussian_packet(g, &[center], 2.5, &[0.4], &[c(1.0)]);
        let a = steps as f64 * g.dx();
        let moved = shift(&f, &[a]);
        let want = gaussian_packet(g, &[center + a], 2.5, &[0.4], &[c(1.0)]);
        // Carrier phase exp(i p a) is common to every sample of `want` relative to
        // the translated packet.
        let phase = C64::from_polar(1.0, -0.4 * a);
        prop_assert!(moved.distance(&want.scaled(phase)) <= 1e-8);
    }

    #[test]
    fn shift_preserves_norm(a in -5.0f64..5.0) {
        let g = GridSpec::new(1, 128, 60.0).unwrap();
        let f = gaussian_packet(g, &[0.0], 3.0, &[0.0], &[c(1.0), c(0.5)]);
        prop_assert!((shift(&f, &[a]).norm() - f.norm()).abs() < 1e-12);
    }
}

/// Central differences converge to the spectral derivative at second order.
#[test]
fn finite_difference_converges_quadratically() {
    let err = |n: usize| {
        let g = GridSpec::new(1, n, 40.0).unwrap();
        let f = gaussian_packet(g, &[0.0], 2.0, &[0.5], &[c(1.0)]);
        let p = apply_p(&f, 0).unwrap();
        let d = f.data();
        let mut worst = 0.0f64;
        for j in 1..n - 1 {
            let fd = (d[j + 1] - d[j - 1]) / (2.0 * g.dx()) * C64::new(0.0, -1.0);
            worst = worst.max((fd - p.data()[j]).norm());
        }
        worst
    };
    let (a, b) = (err(128), err(256));
    let order = (a / b).log2();
    assert!((order - 2.0).abs() < 0.1, "order {order}");
}

#[test]
fn momentum_is_hermitian_on_smooth_states() {
    let g = GridSpec::new(1, 256, 60.0).unwrap();
    let f = gaussian_packet(g, &[1.0], 3.0, &[0.3], &[c(1.0)]);
    let h = gaussian_packet(g, &[-2.0], 2.0, &[-0.6], &[c(1.0)]);
    let lhs = f.inner(&apply_p(&h, 0).unwrap());
    let rhs = apply_p(&f, 0).unwrap().inner(&h);
    assert!((lhs - rhs).norm() < 1e-12);
}
