use diractime::dynamics::{evolve_energy, evolve_time, prepare_packet, PacketSpec, SpinorMix};
use diractime::grid::gaussian_packet;
use diractime::operators::{hd_mode_matrix, negative_energy_projector, positive_energy_projector, t_point_matrix};
use diractime::{DiracMatrices, DiracSystem, GridSpec, PhysParams, SpinMatrix, C64};
use nalgebra::{Complex, DMatrix};
use proptest::prelude::*;

fn dense(m: &SpinMatrix) -> DMatrix<Complex<f64>> {
    let s = m.size();
    DMatrix::from_fn(s, s, |r, c| {
        let z = m.get(r, c);
        Complex::new(z.re, z.im)
    })
}

fn max_abs(m: &DMatrix<Complex<f64>>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `exp(-i theta M)` for Hermitian `M` from a dense eigendecomposition.
fn unitary(m: &DMatrix<Complex<f64>>, theta: f64) -> DMatrix<Complex<f64>> {
    let e = m.clone().symmetric_eigen();
    let d = DMatrix::from_diagonal(&e.eigenvalues.map(|l| Complex::from_polar(1.0, -l * theta)));
    &e.eigenvectors * d * e.eigenvectors.adjoint()
}

fn vec3() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-5.0f64..5.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hamiltonian_squares_to_shell(p in vec3(), m0 in 0.1f64..5.0) {
        let mats = DiracMatrices::build(3).unwrap();
        let params = PhysParams::new(m0).unwrap();
        let h = dense(&hd_mode_matrix(&mats, &params, &p));
        let e2 = params.energy(p.iter().map(|x| x * x).sum()).powi(2);
        let dev = max_abs(&(&h * &h - DMatrix::identity(4, 4) * Complex::new(e2, 0.0)));
        prop_assert!(dev <= 1e-12 * e2);
        prop_assert!(max_abs(&(&h - h.adjoint())) == 0.0);
    }

    #[test]
    fn time_operator_spectrum_matches_dense_eigensolve(r in vec3(), m0 in 0.1f64..5.0) {
        let mats = DiracMatrices::build(3).unwrap();
        let params = PhysParams::new(m0).unwrap();
        let t = dense(&t_point_matrix(&mats, &params, &r));
        let level = params.time_level(r.iter().map(|x| x * x).sum());
        let mut ev: Vec<f64> = t.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip([-level, -level, level, level]) {
            prop_assert!((a - b).abs() <= 1e-12 * level);
        }
    }

    #[test]
    fn projectors_resolve_identity(p in vec3()) {
        let mats = DiracMatrices::build(3).unwrap();
        let params = PhysParams::new(1.0).unwrap();
        let pp = dense(&positive_energy_projector(&mats, &params, &p));
        let pm = dense(&negative_energy_projector(&mats, &params, &p));
        prop_assert!(max_abs(&(&pp + &pm - DMatrix::identity(4, 4))) < 1e-14);
        prop_assert!(max_abs(&(&pp * &pp - &pp)) < 1e-14);
        prop_assert!(max_abs(&(&pp * &pm)) < 1e-14);
    }
}

/// Spectral time evolution agrees with dense exponentiation of each
/// momentum block.
#[test]
fn evolve_time_matches_dense_exponential() {
    let sys = DiracSystem::new(1, 1.3).unwrap();
    let g = GridSpec::new(1, 128, 80.0).unwrap();
    let spec = PacketSpec::new(vec![0.5], 4.0, vec![0.4], SpinorMix::equal_mix());
    let f = prepare_packet(&sys, &g, &spec).unwrap();
    let t = 3.7;
    let got = evolve_time(&sys, &f, t).to_momentum().unwrap();
    let fm = f.to_momentum().unwrap();
    let mut worst = 0.0f64;
    for k in 0..g.points() {
        let u = unitary(&dense(&sys.hd_matrix(&g.mode(k)[..1])), t);
        let v = DMatrix::from_fn(2, 1, |r, _| {
            let z = fm.spinor(k)[r];
            Complex::new(z.re, z.im)
        });
        let w = u * v;
        for r in 0..2 {
            let z = got.spinor(k)[r];
            worst = worst.max((Complex::new(z.re, z.im) - w[r]).norm());
        }
    }
    assert!(worst < 1e-12, "{worst:e}");
}

#[test]
fn evolve_energy_matches_dense_exponential() {
    let sys = DiracSystem::new(3, 1.0).unwrap();
    let g = GridSpec::new(3, 32, 40.0).unwrap();
    let spinor = [C64::new(1.0, 0.0), C64::new(0.0, 0.5), C64::new(-0.3, 0.0), C64::new(0.2, 0.2)];
    let f = gaussian_packet(g, &[0.3, 0.0, -0.2], 2.8, &[0.1, 0.0, 0.0], &spinor);
    let eps = 0.9;
    let got = evolve_energy(&sys, &f, eps).unwrap();
    let mut worst = 0.0f64;
    for j in (0..g.points()).step_by(97) {
        let u = unitary(&dense(&sys.t_matrix(&g.point(j))), eps);
        let v = DMatrix::from_fn(4, 1, |r, _| {
            let z = f.spinor(j)[r];
            Complex::new(z.re, z.im)
        });
        let w = u * v;
        for r in 0..4 {
            let z = got.spinor(j)[r];
            worst = worst.max((Complex::new(z.re, z.im) - w[r]).norm());
        }
    }
    assert!(worst < 1e-12, "{worst:e}");
}

#[test]
fn evolution_is_unitary_and_composes() {
    let sys = DiracSystem::new(1, 1.0).unwrap();
    let g = GridSpec::new(1, 256, 200.0).unwrap();
    let f = prepare_packet(&sys, &g, &PacketSpec::new(vec![0.0], 8.0, vec![0.2], SpinorMix::equal_mix())).unwrap();
    let a = evolve_time(&sys, &evolve_time(&sys, &f, 1.1), 2.3);
    let b = evolve_time(&sys, &f, 3.4);
    assert!(a.distance(&b) < 1e-12);
    assert!((b.norm() - f.norm()).abs() < 1e-12);
    let back = evolve_time(&sys, &b, -3.4);
    assert!(back.distance(&f) < 1e-12);
}

#[test]
fn energy_evolution_refuses_edge_mass() {
    let sys = DiracSystem::new(1, 1.0).unwrap();
    let g = GridSpec::new(1, 64, 20.0).unwrap();
    let f = prepare_packet(&sys, &g, &PacketSpec::new(vec![0.0], 6.0, vec![0.0], SpinorMix::Positive));
    // Either preparation or evolution must reject a packet this wide.
    let rejected = match f {
        Err(_) => true,
        Ok(f) => evolve_energy(&sys, &f, 0.1).is_err(),
    };
    assert!(rejected);
}
