//! C ABI over `trigpred`.
//!
//! Measures live behind the opaque [`TpMeasure`] handle. Every fallible call
//! returns a [`TpStatus`]; on failure the message is kept per thread and can
//! be fetched with [`tp_last_error_message`]. Results are written through out
//! pointers, which are left untouched on failure.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use trigpred::families::measure_from_json;
use trigpred::finite_obs::solve_p2;
use trigpred::hardy::outer_coefficients;
use trigpred::interpolation::{interp_cross_error, interp_distance};
use trigpred::msteps::{mstep_cross_error, mstep_distance, szego_distance};
use trigpred::periodic::{periodic_cross_error, periodic_distance};
use trigpred::{Atom, Error, SpectralMeasure};

/// Opaque spectral measure.
pub struct TpMeasure(SpectralMeasure);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TpStatus {
    Ok = 0,
    /// A required pointer was null or a string was not UTF-8.
    NullArgument = 1,
    /// Invalid grid, measure, exponent, parameters or JSON.
    InvalidInput = 2,
    /// The problem is numerically degenerate (e.g. no projection exists).
    Degenerate = 3,
    /// A measure is not absolutely continuous with respect to the other.
    NotAbsolutelyContinuous = 4,
    /// Internal panic; the library state is still usable.
    Panic = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> TpStatus {
    match e {
        Error::NotAbsolutelyContinuous(_) => TpStatus::NotAbsolutelyContinuous,
        e if e.exit_code() == 3 => TpStatus::Degenerate,
        _ => TpStatus::InvalidInput,
    }
}

fn fail(status: TpStatus, msg: &str) -> TpStatus {
    set_error(msg.to_string());
    status
}

/// Runs `f`, translating errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), TpStatus>) -> TpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            TpStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(TpStatus::Panic, &msg)
        }
    }
}

fn lift<T>(r: trigpred::Result<T>) -> Result<T, TpStatus> {
    r.map_err(|e| fail(status_of(&e), &e.to_string()))
}

unsafe fn measure<'a>(m: *const TpMeasure) -> Result<&'a SpectralMeasure, TpStatus> {
    if m.is_null() {
        return Err(fail(TpStatus::NullArgument, "measure handle is null"));
    }
    Ok(&(*m).0)
}

unsafe fn write<T>(out: *mut T, v: T) -> Result<(), TpStatus> {
    if out.is_null() {
        return Err(fail(TpStatus::NullArgument, "output pointer is null"));
    }
    *out = v;
    Ok(())
}

unsafe fn input_slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], TpStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(TpStatus::NullArgument, &format!("{what} is null")));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output_slice<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], TpStatus> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(fail(TpStatus::NullArgument, &format!("{what} is null")));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

fn boxed(m: SpectralMeasure) -> *mut TpMeasure {
    Box::into_raw(Box::new(TpMeasure(m)))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn tp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a measure description, e.g.
/// `{"density": {"family": "cos", "params": {"a": 2}}}` or
/// `{"density": {"samples": [...]}, "atoms": [{"location": 0, "mass": 1}]}`.
/// `grid_size` is used when the document does not fix one.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tp_measure_from_json(json: *const c_char, grid_size: usize, out: *mut *mut TpMeasure) -> TpStatus {
    guard(|| {
        if json.is_null() {
            return Err(fail(TpStatus::NullArgument, "json is null"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| fail(TpStatus::NullArgument, "json is not UTF-8"))?;
        let v: serde_json::Value =
            serde_json::from_str(text).map_err(|e| fail(TpStatus::InvalidInput, &format!("invalid JSON: {e}")))?;
        let m = lift(measure_from_json(&v, grid_size))?;
        if out.is_null() {
            return Err(fail(TpStatus::NullArgument, "output pointer is null"));
        }
        *out = boxed(m);
        Ok(())
    })
}

/// Builds a measure from `len` density samples at the cell midpoints of a
/// uniform grid (`len` a power of two) plus `n_atoms` point masses.
///
/// # Safety
/// Arrays must hold the stated number of elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tp_measure_from_samples(
    samples: *const f64,
    len: usize,
    atom_locations: *const f64,
    atom_masses: *const f64,
    n_atoms: usize,
    out: *mut *mut TpMeasure,
) -> TpStatus {
    guard(|| {
        let s = input_slice(samples, len, "samples")?.to_vec();
        let locs = input_slice(atom_locations, n_atoms, "atom_locations")?;
        let masses = input_slice(atom_masses, n_atoms, "atom_masses")?;
        let atoms: Vec<Atom> = locs.iter().zip(masses).map(|(&l, &m)| Atom::new(l, m)).collect();
        let m = if s.iter().all(|&x| x == 0.0) && !s.is_empty() {
            lift(SpectralMeasure::atomic(s.len(), atoms))?
        } else {
            lift(SpectralMeasure::from_samples(s, atoms))?
        };
        if out.is_null() {
            return Err(fail(TpStatus::NullArgument, "output pointer is null"));
        }
        *out = boxed(m);
        Ok(())
    })
}

/// Releases a measure; null is ignored.
///
/// # Safety
/// `m` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tp_measure_free(m: *mut TpMeasure) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tp_measure_grid_size(m: *const TpMeasure, out: *mut usize) -> TpStatus {
    guard(|| write(out, measure(m)?.grid_size()))
}

/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tp_measure_total_mass(m: *const TpMeasure, out: *mut f64) -> TpStatus {
    guard(|| write(out, measure(m)?.total_mass()))
}

/// Interpolation error `d_p(μ)` of one missing value.
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tp_interp_distance(m: *const TpMeasure, p: f64, out: *mut f64) -> TpStatus {
    guard(|| write(out, lift(interp_distance(measure(m)?, p))?))
}

/// `∫ |1 − φ_p(ν)|^p dμ` for the interpolation problem; may be `+∞`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tp_interp_cross_error(nu: *const TpMeasure, mu: *const TpMeasure, p: f64, out: *mut f64) -> TpStatus {
    guard(|| write(out, lift(interp_cross_error(measure(nu)?, measure(mu)?, p))?))
}

/// One-step prediction error `exp ∫ log w dλ`.
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tp_szego_distance(m: *const TpMeasure, out: *mut f64) -> TpStatus {
    guard(|| write(out, lift(szego_distance(measure(m)?))?))
}

/// First `order` Taylor coefficients of the outer function, split into real
/// and imaginary parts.
///
/// # Safety
/// `m` must be a live handle; `re` and `im` must hold `order` doubles.
#[no_mangle]
pub unsafe extern "C" fn tp_outer_coefficients(m: *const TpMeasure, order: usize, re: *mut f64, im: *mut f64) -> TpStatus {
    guard(|| {
        let mu = measure(m)?;
        let re = output_slice(re, order, "re")?;
        let im = output_slice(im, order, "im")?;
        if order == 0 {
            return Err(fail(TpStatus::InvalidInput, "order must be positive"));
        }
        let b = lift(outer_coefficients(mu, order))?;
        for (j, c) in b.coeffs.iter().take(order).enumerate() {
            re[j] = c.re;
            im[j] = c.im;
        }
        Ok(())
    })
}

/// m-step prediction error `Σ_{j<m} |b_j|²` (the same for every `p`).
///
/// # Safety
/// `mu` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tp_mstep_distance(mu: *const TpMeasure, steps: usize, out: *mut f64) -> TpStatus {
    guard(|| write(out, lift(mstep_distance(measure(mu)?, steps))?))
}

/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tp_mstep_cross_error(
    nu: *const TpMeasure,
    mu: *const TpMeasure,
    steps: usize,
    p: f64,
    out: *mut f64,
) -> TpStatus {
    guard(|| write(out, lift(mstep_cross_error(measure(nu)?, measure(mu)?, steps, p))?))
}

/// `L²` projection of `1` onto `span{e_x : x ∈ freqs}`. Writes `k`
/// coefficients and the distance.
///
/// # Safety
/// `mu` must be a live handle; `freqs`, `coeff_re`, `coeff_im` must hold
/// `k` elements; `distance` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tp_finite_p2(
    mu: *const TpMeasure,
    freqs: *const i64,
    k: usize,
    coeff_re: *mut f64,
    coeff_im: *mut f64,
    distance: *mut f64,
) -> TpStatus {
    guard(|| {
        let mu = measure(mu)?;
        let f = input_slice(freqs, k, "freqs")?;
        let re = output_slice(coeff_re, k, "coeff_re")?;
        let im = output_slice(coeff_im, k, "coeff_im")?;
        if distance.is_null() {
            return Err(fail(TpStatus::NullArgument, "distance is null"));
        }
        let sol = lift(solve_p2(mu, f))?;
        for (j, c) in sol.coeffs.iter().enumerate() {
            re[j] = c.re;
            im[j] = c.im;
        }
        *distance = sol.distance;
        Ok(())
    })
}

/// Error of approximating `1` from the coset `x + qℤ`.
///
/// # Safety
/// `mu` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tp_periodic_distance(mu: *const TpMeasure, q: usize, x: i64, p: f64, out: *mut f64) -> TpStatus {
    guard(|| write(out, lift(periodic_distance(measure(mu)?, q, x, p))?))
}

/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tp_periodic_cross_error(
    nu: *const TpMeasure,
    mu: *const TpMeasure,
    q: usize,
    x: i64,
    p: f64,
    out: *mut f64,
) -> TpStatus {
    guard(|| write(out, lift(periodic_cross_error(measure(nu)?, measure(mu)?, q, x, p))?))
}
