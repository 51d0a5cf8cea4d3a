use std::ffi::{CStr, CString};
use std::ptr;

use diractime_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 256];
    unsafe { dt_last_error(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn system(dim: usize, n: usize, extent: f64) -> *mut DtSystem {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { dt_system_new(dim, n, extent, 1.0, &mut s) }, DtStatus::Ok);
    s
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(dt_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn invalid_grid_sets_error() {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { dt_system_new(2, 64, 10.0, 1.0, &mut s) }, DtStatus::InvalidArgument);
    assert!(s.is_null());
    assert!(last_error().contains("dimension"));
    assert_eq!(unsafe { dt_system_new(1, 64, 10.0, 1.0, ptr::null_mut()) }, DtStatus::NullPointer);
}

#[test]
fn packet_round_trip_and_evolution() {
    unsafe {
        let s = system(1, 1024, 400.0);
        let (c, p) = (0.0, 0.0);
        let mut f = ptr::null_mut();
        assert_eq!(dt_packet_prepare(s, &c, 10.0, &p, 1.0, 0.0, &mut f), DtStatus::Ok);

        let mut len = 0;
        assert_eq!(dt_system_field_len(s, &mut len), DtStatus::Ok);
        assert_eq!(len, dt_field_len(f));
        let mut buf = vec![0.0; len];
        assert_eq!(dt_field_copy(f, buf.as_mut_ptr(), len - 1), DtStatus::BufferTooSmall);
        assert_eq!(dt_field_copy(f, buf.as_mut_ptr(), len), DtStatus::Ok);

        let mut g = ptr::null_mut();
        assert_eq!(dt_field_from_data(s, DtRepresentation::Position, buf.as_ptr(), len, &mut g), DtStatus::Ok);

        let mut h = ptr::null_mut();
        assert_eq!(dt_evolve_time(s, g, 2.5, &mut h), DtStatus::Ok);
        let name = CString::new("norm").unwrap();
        let mut norm = 0.0;
        assert_eq!(dt_expectation(s, h, name.as_ptr(), &mut norm), DtStatus::Ok);
        assert!((norm - 1.0).abs() < 1e-12);

        let beta = CString::new("beta").unwrap();
        let (mut b0, mut b1) = (0.0, 0.0);
        dt_expectation(s, f, beta.as_ptr(), &mut b0);
        dt_expectation(s, h, beta.as_ptr(), &mut b1);
        assert!((b0 - b1).abs() < 1e-12);

        let mut e = ptr::null_mut();
        assert_eq!(dt_evolve_energy(s, f, 0.3, &mut e), DtStatus::Ok);

        let (mut dx, mut dp) = (0.0, 0.0);
        assert_eq!(dt_uncertainty_xp(f, 0, &mut dx, &mut dp), DtStatus::Ok);
        assert!(dx * dp >= 0.5 - 1e-9);
        assert_eq!(dt_uncertainty_xp(f, 1, &mut dx, &mut dp), DtStatus::InvalidArgument);

        let bad = CString::new("spin").unwrap();
        assert_eq!(dt_expectation(s, f, bad.as_ptr(), &mut norm), DtStatus::InvalidArgument);
        assert!(last_error().contains("spin"));

        for x in [f, g, h, e] {
            dt_field_free(x);
        }
        dt_system_free(s);
    }
}

#[test]
fn edge_mass_is_boundary_unsafe() {
    unsafe {
        let s = system(1, 64, 20.0);
        let len = 2 * 64 * 2;
        let data: Vec<f64> = (0..len).map(|i| if i < 4 { 1.0 } else { 0.0 }).collect();
        let mut f = ptr::null_mut();
        assert_eq!(dt_field_from_data(s, DtRepresentation::Position, data.as_ptr(), len, &mut f), DtStatus::Ok);
        let mut g = ptr::null_mut();
        assert_eq!(dt_evolve_energy(s, f, 0.1, &mut g), DtStatus::BoundaryUnsafe);
        assert!(g.is_null());
        assert_eq!(dt_field_from_data(s, DtRepresentation::Position, data.as_ptr(), len - 2, &mut g), DtStatus::InvalidArgument);
        dt_field_free(f);
        dt_system_free(s);
    }
}

#[test]
fn spectrum_gaps_and_commutator() {
    unsafe {
        let s = system(3, 32, 40.0);
        let (mut eg, mut tg) = (0.0, 0.0);
        assert_eq!(dt_spectrum_gaps(s, &mut eg, &mut tg), DtStatus::Ok);
        assert_eq!(eg, 2.0);
        assert!((tg - 4.0 * std::f64::consts::PI).abs() < 1e-12);

        let (c, p) = ([0.0; 3], [0.0; 3]);
        let mut f = ptr::null_mut();
        let st = dt_packet_prepare(s, c.as_ptr(), 2.8, p.as_ptr(), 0.6, 0.8, &mut f);
        if st == DtStatus::Ok {
            let mut r = 0.0;
            assert_eq!(dt_commutator_residual(s, f, &mut r), DtStatus::Ok);
            assert!(r.is_finite());
            dt_field_free(f);
        } else {
            assert_eq!(st, DtStatus::BoundaryUnsafe);
        }
        dt_system_free(s);
        dt_system_free(ptr::null_mut());
        dt_field_free(ptr::null_mut());
    }
}
