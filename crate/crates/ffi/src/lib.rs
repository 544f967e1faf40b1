//! C ABI over the geometry library.
//!
//! Objects are opaque handles created by `hb_*_new` and released by the
//! matching `hb_*_free`. Every fallible function returns an [`HbStatus`];
//! on failure [`hb_last_error_message`] describes the cause. Strings
//! returned to the caller are owned by the caller and must be released
//! with [`hb_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hopf_berger::curvature::CurvatureModel;
use hopf_berger::error::GeometryError;
use hopf_berger::geodesics::{self, GeodesicParams};
use hopf_berger::liealg::{Family, PVector, Presentation};
use hopf_berger::subspace::{self, Subspace, Verdict};
use hopf_berger::{catalog, report};
use nalgebra::DMatrix;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    GeometryError = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HbFamily {
    Complex = 0,
    Quaternionic = 1,
    Octonionic = 2,
}

/// Outcome of a totally geodesic certificate.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HbVerdict {
    WellPositioned = 0,
    NotWellPositioned = 1,
    NotTotallyGeodesic = 2,
}

/// A presentation together with its curvature tensors.
pub struct HbModel {
    inner: CurvatureModel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(s));
}

fn fail(status: HbStatus, msg: impl Into<String>) -> HbStatus {
    set_error(msg);
    status
}

fn geometry(e: GeometryError) -> HbStatus {
    let status = match e {
        GeometryError::DimensionMismatch { .. } => HbStatus::DimensionMismatch,
        GeometryError::InvalidN(_)
        | GeometryError::InvalidTau(_)
        | GeometryError::OctonionicN(_)
        | GeometryError::TauOutOfRange { .. }
        | GeometryError::IndexOutOfRange { .. }
        | GeometryError::InvalidTheta(_)
        | GeometryError::InvalidGeodesic(_)
        | GeometryError::InvalidArgument(_) => HbStatus::InvalidArgument,
        _ => HbStatus::GeometryError,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> HbStatus) -> HbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(HbStatus::Panic, "internal panic"),
    }
}

unsafe fn vector(p: *const f64, len: usize, dim: usize) -> Result<PVector, HbStatus> {
    if p.is_null() {
        return Err(fail(HbStatus::NullPointer, "null vector"));
    }
    if len != dim {
        return Err(fail(HbStatus::DimensionMismatch, format!("expected length {dim}, got {len}")));
    }
    Ok(PVector::from_column_slice(std::slice::from_raw_parts(p, len)))
}

unsafe fn model<'a>(m: *const HbModel) -> Result<&'a CurvatureModel, HbStatus> {
    m.as_ref().map(|m| &m.inner).ok_or_else(|| fail(HbStatus::NullPointer, "null model"))
}

unsafe fn write_out(out: *mut f64, v: &[f64]) -> HbStatus {
    if out.is_null() {
        return fail(HbStatus::NullPointer, "null output buffer");
    }
    ptr::copy_nonoverlapping(v.as_ptr(), out, v.len());
    HbStatus::Ok
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

/// Library version as a static NUL-terminated string. Do not free.
#[no_mangle]
pub extern "C" fn hb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copy of the message for the last failure on this thread, or NULL.
/// Release with [`hb_string_free`].
#[no_mangle]
pub extern "C" fn hb_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null_mut(), |s| s.clone().into_raw()))
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must be NULL or a pointer returned by a function of this library
/// that is documented as caller-owned, and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Build the sphere `S_{F,tau}` and its curvature tensors.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle. On
/// success the handle must be released with [`hb_model_free`].
#[no_mangle]
pub unsafe extern "C" fn hb_model_new(family: HbFamily, n: usize, tau: f64, out: *mut *mut HbModel) -> HbStatus {
    guard(|| {
        if out.is_null() {
            return fail(HbStatus::NullPointer, "null output handle");
        }
        let f = match family {
            HbFamily::Complex => Family::C,
            HbFamily::Quaternionic => Family::H,
            HbFamily::Octonionic => Family::O,
        };
        match Presentation::build(f, n, tau) {
            Ok(p) => {
                *out = Box::into_raw(Box::new(HbModel { inner: CurvatureModel::new(p) }));
                HbStatus::Ok
            }
            Err(e) => geometry(e),
        }
    })
}

/// # Safety
/// `m` must be NULL or a handle from [`hb_model_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hb_model_free(m: *mut HbModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Dimension of p and of its vertical part.
///
/// # Safety
/// `m` must be a live handle; `dim` and `dim_p1` must be writable or NULL.
#[no_mangle]
pub unsafe extern "C" fn hb_model_dims(m: *const HbModel, dim: *mut usize, dim_p1: *mut usize) -> HbStatus {
    guard(|| {
        let model = match model(m) {
            Ok(x) => x,
            Err(s) => return s,
        };
        if !dim.is_null() {
            *dim = model.dim();
        }
        if !dim_p1.is_null() {
            *dim_p1 = model.presentation().dim_p1();
        }
        HbStatus::Ok
    })
}

/// `out = R(x, y) z`; all buffers have length `len`, which must equal the
/// dimension of p.
///
/// # Safety
/// `m` must be a live handle; `x`, `y`, `z` must point to `len` readable
/// doubles and `out` to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn hb_curvature(
    m: *const HbModel,
    x: *const f64,
    y: *const f64,
    z: *const f64,
    len: usize,
    out: *mut f64,
) -> HbStatus {
    guard(|| {
        let run = || -> Result<HbStatus, HbStatus> {
            let model = model(m)?;
            let d = model.dim();
            let r = model.r(&vector(x, len, d)?, &vector(y, len, d)?, &vector(z, len, d)?);
            Ok(write_out(out, r.as_slice()))
        };
        run().unwrap_or_else(|s| s)
    })
}

/// Sectional curvature of the plane spanned by `x` and `y`.
///
/// # Safety
/// `m` must be a live handle; `x`, `y` must point to `len` readable doubles
/// and `out` to one writable double.
#[no_mangle]
pub unsafe extern "C" fn hb_sectional(m: *const HbModel, x: *const f64, y: *const f64, len: usize, out: *mut f64) -> HbStatus {
    guard(|| {
        let run = || -> Result<HbStatus, HbStatus> {
            let model = model(m)?;
            let d = model.dim();
            let k = model.sectional(&vector(x, len, d)?, &vector(y, len, d)?).map_err(geometry)?;
            Ok(write_out(out, &[k]))
        };
        run().unwrap_or_else(|s| s)
    })
}

/// Eigenvalues of the Jacobi operator `y -> R(y,x)x`, ascending, written to
/// `out` (length `len`).
///
/// # Safety
/// `m` must be a live handle; `x` must point to `len` readable doubles and
/// `out` to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn hb_jacobi_eigenvalues(m: *const HbModel, x: *const f64, len: usize, out: *mut f64) -> HbStatus {
    guard(|| {
        let run = || -> Result<HbStatus, HbStatus> {
            let model = model(m)?;
            let j = model.jacobi(&vector(x, len, model.dim())?).map_err(geometry)?;
            let mut ev: Vec<f64> = j.symmetric_eigenvalues().iter().copied().collect();
            ev.sort_by(f64::total_cmp);
            Ok(write_out(out, &ev))
        };
        run().unwrap_or_else(|s| s)
    })
}

/// Certify the span of `k` vectors stored consecutively in `frame`
/// (`k * len` doubles).
///
/// # Safety
/// `m` must be a live handle; `frame` must point to `k * len` readable
/// doubles and `verdict` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn hb_tg_certificate(
    m: *const HbModel,
    frame: *const f64,
    len: usize,
    k: usize,
    verdict: *mut HbVerdict,
) -> HbStatus {
    guard(|| {
        let run = || -> Result<HbStatus, HbStatus> {
            let model = model(m)?;
            let d = model.dim();
            if frame.is_null() || verdict.is_null() {
                return Err(fail(HbStatus::NullPointer, "null frame or verdict"));
            }
            if len != d {
                return Err(fail(HbStatus::DimensionMismatch, format!("expected length {d}, got {len}")));
            }
            let data = std::slice::from_raw_parts(frame, len * k);
            let f = DMatrix::from_column_slice(d, k, data);
            let v = Subspace::from_frame(model.presentation(), &f).map_err(geometry)?;
            let c = subspace::tg_certificate(model, &v).map_err(geometry)?;
            *verdict = match c.verdict {
                Verdict::WellPositionedTG => HbVerdict::WellPositioned,
                Verdict::NotWellPositionedTG => HbVerdict::NotWellPositioned,
                Verdict::NotTG => HbVerdict::NotTotallyGeodesic,
            };
            Ok(HbStatus::Ok)
        };
        run().unwrap_or_else(|s| s)
    })
}

/// JSON array of the catalog subspaces of the model, with frames.
/// Release with [`hb_string_free`]; NULL on failure.
///
/// # Safety
/// `m` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hb_catalog_json(m: *const HbModel) -> *mut c_char {
    let r = catch_unwind(AssertUnwindSafe(|| {
        let model = model(m).ok()?;
        match catalog::catalog_entries(model.presentation()) {
            Ok(e) => Some(into_c_string(report::to_json_string(&catalog::dump(&e)))),
            Err(e) => {
                geometry(e);
                None
            }
        }
    }));
    r.ok().flatten().unwrap_or(ptr::null_mut())
}

/// Point of the Berger 3-sphere geodesic with unit coefficients
/// `(a1, a2, a3)` at time `s`, as `(re z1, im z1, re z2, im z2)`.
///
/// # Safety
/// `out` must point to 4 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn hb_geodesic_point(a1: f64, a2: f64, a3: f64, tau: f64, s: f64, out: *mut f64) -> HbStatus {
    guard(|| match GeodesicParams::new(a1, a2, a3, tau) {
        Ok(g) => write_out(out, &geodesics::to_reals(&geodesics::berger_geodesic_point(&g, s))),
        Err(e) => geometry(e),
    })
}

/// Run a command line of the `hopf-berger` tool (without the program name,
/// arguments separated by single spaces) and return its JSON report.
/// `exit_code` receives the tool's exit status. Release the result with
/// [`hb_string_free`].
///
/// # Safety
/// `args` must be a valid NUL-terminated string; `exit_code` must be
/// writable or NULL.
#[no_mangle]
pub unsafe extern "C" fn hb_run_json(args: *const c_char, exit_code: *mut i32) -> *mut c_char {
    let r = catch_unwind(AssertUnwindSafe(|| {
        if args.is_null() {
            fail(HbStatus::NullPointer, "null arguments");
            return (2, None);
        }
        let line = CStr::from_ptr(args).to_string_lossy().into_owned();
        let mut argv = vec!["hopf-berger".to_string()];
        argv.extend(line.split_whitespace().map(str::to_string));
        let cli = match hopf_berger::cli::parse(&argv) {
            Ok(c) => c,
            Err(e) => {
                fail(HbStatus::InvalidArgument, e);
                return (2, None);
            }
        };
        match hopf_berger::cli::execute(&cli, argv[1..].to_vec()) {
            Ok(rep) => (if rep.pass { 0 } else { 1 }, Some(into_c_string(rep.to_json()))),
            Err(e) => {
                geometry(e);
                (2, None)
            }
        }
    }));
    let (code, s) = r.unwrap_or((2, None));
    if !exit_code.is_null() {
        *exit_code = code;
    }
    s.unwrap_or(ptr::null_mut())
}
