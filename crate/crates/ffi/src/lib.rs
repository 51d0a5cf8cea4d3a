//! C ABI over the `diractime` library.
//!
//! Handles are opaque and owned by the caller: every `*_new`/producing call
//! has a matching `*_free`. Functions return a [`DtStatus`]; on failure the
//! message is kept per thread and read with [`dt_last_error`]. Spinor data
//! crosses the boundary as interleaved `(re, im)` doubles in lattice order,
//! spinor component fastest.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use diractime::analysis;
use diractime::dynamics::{self, Observable, PacketSpec, SpinorMix};
use diractime::operators::{spectrum, OperatorTag};
use diractime::{DiracSystem, Error, GridSpec, Representation, SpinorField, C64};
use libc::size_t;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    BoundaryUnsafe = 3,
    Mismatch = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DtRepresentation {
    Position = 0,
    Momentum = 1,
}

/// Operators and lattice for one dimension and rest mass.
pub struct DtSystem {
    sys: DiracSystem,
    grid: GridSpec,
}

/// A spinor field on a system's lattice.
pub struct DtField {
    field: SpinorField,
}

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into_bytes());
}

fn status_of(e: &Error) -> DtStatus {
    match e {
        Error::BoundaryUnsafe { .. } => DtStatus::BoundaryUnsafe,
        Error::RepresentationMismatch { .. } => DtStatus::Mismatch,
        _ => DtStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), (DtStatus, String)>) -> DtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DtStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            DtStatus::Panic
        }
    }
}

fn lib<T>(r: diractime::Result<T>) -> Result<T, (DtStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn arg(msg: &str) -> (DtStatus, String) {
    (DtStatus::InvalidArgument, msg.to_string())
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (DtStatus, String)> {
    p.as_ref().ok_or_else(|| (DtStatus::NullPointer, format!("{what} is null")))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], (DtStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err((DtStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write<T>(out: *mut T, v: T, what: &str) -> Result<(), (DtStatus, String)> {
    if out.is_null() {
        return Err((DtStatus::NullPointer, format!("{what} is null")));
    }
    out.write(v);
    Ok(())
}

fn boxed_field(field: SpinorField) -> *mut DtField {
    Box::into_raw(Box::new(DtField { field }))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (truncated,
/// always NUL-terminated when `len > 0`). Returns the full message length.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn dt_last_error(buf: *mut c_char, len: size_t) -> size_t {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Builds a system with `n` points per axis on a box of side `extent`.
///
/// # Safety
/// `out` must be valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn dt_system_new(dim: size_t, n: size_t, extent: f64, m0: f64, out: *mut *mut DtSystem) -> DtStatus {
    guard(|| {
        let grid = lib(GridSpec::new(dim, n, extent))?;
        let sys = lib(DiracSystem::new(dim, m0))?;
        write(out, Box::into_raw(Box::new(DtSystem { sys, grid })), "out")
    })
}

/// # Safety
/// `sys` must be null or a handle from [`dt_system_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dt_system_free(sys: *mut DtSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Number of doubles in a field buffer for this system.
///
/// # Safety
/// `sys` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dt_system_field_len(sys: *const DtSystem, out: *mut size_t) -> DtStatus {
    guard(|| {
        let s = deref(sys, "sys")?;
        let spinor = diractime::operators::spinor_size(s.grid.dim());
        write(out, 2 * s.grid.points() * spinor, "out")
    })
}

/// Energy and time gaps of the lattice spectra.
///
/// # Safety
/// `sys` must be a live handle; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn dt_spectrum_gaps(sys: *const DtSystem, energy_gap: *mut f64, time_gap: *mut f64) -> DtStatus {
    guard(|| {
        let s = deref(sys, "sys")?;
        let h = spectrum(OperatorTag::Hamiltonian, &s.grid, &s.sys.params);
        let t = spectrum(OperatorTag::Time, &s.grid, &s.sys.params);
        write(energy_gap, h.gap, "energy_gap")?;
        write(time_gap, t.gap, "time_gap")
    })
}

/// Normalized Gaussian packet. `center` and `pbar` hold `dim` values; the
/// branch amplitudes select positive (1, 0), negative (0, 1) or mixed states.
///
/// # Safety
/// `center` and `pbar` must point to `dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dt_packet_prepare(
    sys: *const DtSystem,
    center: *const f64,
    width: f64,
    pbar: *const f64,
    w_plus: f64,
    w_minus: f64,
    out: *mut *mut DtField,
) -> DtStatus {
    guard(|| {
        let s = deref(sys, "sys")?;
        let dim = s.grid.dim();
        let center = slice(center, dim, "center")?.to_vec();
        let pbar = slice(pbar, dim, "pbar")?.to_vec();
        let mix = SpinorMix::Mixed { w_plus, w_minus };
        let f = lib(dynamics::prepare_packet(&s.sys, &s.grid, &PacketSpec::new(center, width, pbar, mix)))?;
        write(out, boxed_field(f), "out")
    })
}

/// Wraps caller data (see [`dt_system_field_len`] for the length).
///
/// # Safety
/// `data` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dt_field_from_data(
    sys: *const DtSystem,
    rep: DtRepresentation,
    data: *const f64,
    len: size_t,
    out: *mut *mut DtField,
) -> DtStatus {
    guard(|| {
        let s = deref(sys, "sys")?;
        if len % 2 != 0 {
            return Err(arg("data length must be even"));
        }
        let raw = slice(data, len, "data")?;
        if raw.iter().any(|v| !v.is_finite()) {
            return Err(arg("data contains non-finite values"));
        }
        let values: Vec<C64> = raw.chunks_exact(2).map(|c| C64::new(c[0], c[1])).collect();
        let rep = match rep {
            DtRepresentation::Position => Representation::Position,
            DtRepresentation::Momentum => Representation::Momentum,
        };
        let spinor = diractime::operators::spinor_size(s.grid.dim());
        let f = lib(SpinorField::from_data(s.grid, spinor, rep, values))?;
        write(out, boxed_field(f), "out")
    })
}

/// Copies the field's position-space data into `buf` (`len` doubles).
///
/// # Safety
/// `buf` must be valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn dt_field_copy(field: *const DtField, buf: *mut f64, len: size_t) -> DtStatus {
    guard(|| {
        let f = deref(field, "field")?.field.to_rep(Representation::Position);
        let need = 2 * f.data().len();
        if len < need {
            return Err((DtStatus::BufferTooSmall, format!("buffer holds {len} doubles, need {need}")));
        }
        if buf.is_null() {
            return Err((DtStatus::NullPointer, "buf is null".into()));
        }
        for (i, z) in f.data().iter().enumerate() {
            *buf.add(2 * i) = z.re;
            *buf.add(2 * i + 1) = z.im;
        }
        Ok(())
    })
}

/// Number of doubles [`dt_field_copy`] writes; 0 for a null handle.
///
/// # Safety
/// `field` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dt_field_len(field: *const DtField) -> size_t {
    field.as_ref().map_or(0, |f| 2 * f.field.data().len())
}

/// # Safety
/// `field` must be null or a live handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dt_field_free(field: *mut DtField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

unsafe fn evolve(
    sys: *const DtSystem,
    field: *const DtField,
    out: *mut *mut DtField,
    step: impl FnOnce(&DiracSystem, &SpinorField) -> diractime::Result<SpinorField>,
) -> DtStatus {
    guard(|| {
        let s = deref(sys, "sys")?;
        let f = deref(field, "field")?;
        lib(s.sys.check_field(&f.field))?;
        let g = lib(step(&s.sys, &f.field))?;
        write(out, boxed_field(g), "out")
    })
}

/// `exp(-i H_D t) f` into a new handle.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dt_evolve_time(sys: *const DtSystem, field: *const DtField, t: f64, out: *mut *mut DtField) -> DtStatus {
    if !t.is_finite() {
        set_error("t must be finite".into());
        return DtStatus::InvalidArgument;
    }
    evolve(sys, field, out, |s, f| Ok(dynamics::evolve_time(s, f, t)))
}

/// `exp(-i T eps) f` into a new handle. Fails with `BoundaryUnsafe` for
/// states with mass near the box edge.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dt_evolve_energy(sys: *const DtSystem, field: *const DtField, eps: f64, out: *mut *mut DtField) -> DtStatus {
    if !eps.is_finite() {
        set_error("eps must be finite".into());
        return DtStatus::InvalidArgument;
    }
    evolve(sys, field, out, |s, f| dynamics::evolve_energy(s, f, eps))
}

/// Expectation value of a named observable (`x_0`, `p_1`, `alpha_2`,
/// `beta`, `H`, `T`, `norm`).
///
/// # Safety
/// `name` must be a NUL-terminated string; handles must be live.
#[no_mangle]
pub unsafe extern "C" fn dt_expectation(
    sys: *const DtSystem,
    field: *const DtField,
    name: *const c_char,
    out: *mut f64,
) -> DtStatus {
    guard(|| {
        let s = deref(sys, "sys")?;
        let f = deref(field, "field")?;
        if name.is_null() {
            return Err((DtStatus::NullPointer, "name is null".into()));
        }
        let name = CStr::from_ptr(name).to_str().map_err(|_| arg("name is not UTF-8"))?;
        let obs: Observable = lib(name.parse())?;
        write(out, lib(dynamics::expectation(&s.sys, &f.field, obs))?, "out")
    })
}

/// Position and momentum spreads along `axis`.
///
/// # Safety
/// `field` must be live; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn dt_uncertainty_xp(field: *const DtField, axis: size_t, delta_x: *mut f64, delta_p: *mut f64) -> DtStatus {
    guard(|| {
        let f = deref(field, "field")?;
        let all = lib(analysis::uncertainty_xp(&f.field))?;
        let u = all.get(axis).ok_or_else(|| arg("axis out of range"))?;
        write(delta_x, u.delta_x, "delta_x")?;
        write(delta_p, u.delta_p, "delta_p")
    })
}

/// Relative residual of `[T, H_D]` against its closed form (3D only).
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dt_commutator_residual(sys: *const DtSystem, field: *const DtField, out: *mut f64) -> DtStatus {
    guard(|| {
        let s = deref(sys, "sys")?;
        let f = deref(field, "field")?;
        write(out, lib(s.sys.commutator_th_residual(&f.field))?, "out")
    })
}
