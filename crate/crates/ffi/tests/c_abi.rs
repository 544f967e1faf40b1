use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::ptr;

use hopf_berger_ffi::*;

fn take_string(p: *mut std::ffi::c_char) -> String {
    assert!(!p.is_null());
    let s = unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned();
    unsafe { hb_string_free(p) };
    s
}

fn new_model(f: HbFamily, n: usize, tau: f64) -> *mut HbModel {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { hb_model_new(f, n, tau, &mut m) }, HbStatus::Ok);
    m
}

fn basis(d: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[i] = 1.0;
    v
}

#[test]
fn model_lifecycle_and_dims() {
    let m = new_model(HbFamily::Quaternionic, 1, 0.25);
    let (mut d, mut d1) = (0, 0);
    assert_eq!(unsafe { hb_model_dims(m, &mut d, &mut d1) }, HbStatus::Ok);
    assert_eq!((d, d1), (7, 3));
    unsafe { hb_model_free(m) };
    unsafe { hb_model_free(ptr::null_mut()) };
}

#[test]
fn invalid_arguments_set_error() {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { hb_model_new(HbFamily::Complex, 1, -1.0, &mut m) }, HbStatus::InvalidArgument);
    assert!(m.is_null());
    assert!(!take_string(hb_last_error_message()).is_empty());
    assert_eq!(unsafe { hb_model_new(HbFamily::Octonionic, 2, 0.5, &mut m) }, HbStatus::InvalidArgument);
    assert_eq!(unsafe { hb_model_new(HbFamily::Complex, 1, 0.5, ptr::null_mut()) }, HbStatus::NullPointer);
    let mut k = 0.0;
    assert_eq!(unsafe { hb_sectional(ptr::null(), ptr::null(), ptr::null(), 0, &mut k) }, HbStatus::NullPointer);
}

#[test]
fn jacobi_eigenvalues_of_vertical_vector() {
    let tau = 0.25;
    let m = new_model(HbFamily::Quaternionic, 1, tau);
    let x = basis(7, 0);
    let mut ev = vec![0.0; 7];
    assert_eq!(unsafe { hb_jacobi_eigenvalues(m, x.as_ptr(), 7, ev.as_mut_ptr()) }, HbStatus::Ok);
    let want = [0.0, tau, tau, tau, tau, 1.0 / tau, 1.0 / tau];
    for (a, b) in ev.iter().zip(want) {
        assert!((a - b).abs() < 1e-10, "{ev:?}");
    }
    let short = [0.0; 3];
    assert_eq!(
        unsafe { hb_jacobi_eigenvalues(m, short.as_ptr(), 3, ev.as_mut_ptr()) },
        HbStatus::DimensionMismatch
    );
    unsafe { hb_model_free(m) };
}

#[test]
fn round_sphere_sectional_and_curvature() {
    let m = new_model(HbFamily::Complex, 2, 1.0);
    let (x, y) = (basis(5, 1), basis(5, 3));
    let mut k = 0.0;
    assert_eq!(unsafe { hb_sectional(m, x.as_ptr(), y.as_ptr(), 5, &mut k) }, HbStatus::Ok);
    assert!((k - 1.0).abs() < 1e-12);
    let mut r = vec![0.0; 5];
    assert_eq!(unsafe { hb_curvature(m, x.as_ptr(), y.as_ptr(), y.as_ptr(), 5, r.as_mut_ptr()) }, HbStatus::Ok);
    for (a, b) in r.iter().zip(&x) {
        assert!((a - b).abs() < 1e-12);
    }
    unsafe { hb_model_free(m) };
}

#[test]
fn certificate_of_vertical_and_mixed_planes() {
    let m = new_model(HbFamily::Quaternionic, 1, 0.4);
    let mut frame = basis(7, 0);
    frame.extend(basis(7, 1));
    let mut v = HbVerdict::NotTotallyGeodesic;
    assert_eq!(unsafe { hb_tg_certificate(m, frame.as_ptr(), 7, 2, &mut v) }, HbStatus::Ok);
    assert_eq!(v, HbVerdict::WellPositioned);
    let mut frame = basis(7, 0);
    frame[3] = 1.0;
    frame.extend(basis(7, 1));
    assert_eq!(unsafe { hb_tg_certificate(m, frame.as_ptr(), 7, 2, &mut v) }, HbStatus::Ok);
    assert_eq!(v, HbVerdict::NotTotallyGeodesic);
    unsafe { hb_model_free(m) };
}

#[test]
fn catalog_and_command_json() {
    let m = new_model(HbFamily::Octonionic, 1, 0.25);
    let s = take_string(unsafe { hb_catalog_json(m) });
    assert!(s.contains("NWP_sphere_hat") && s.contains("\"frame\""));
    unsafe { hb_model_free(m) };

    let args = CString::new("spectra --family H --n 1 --tau 0.25").unwrap();
    let mut code = -1;
    let s = take_string(unsafe { hb_run_json(args.as_ptr(), &mut code) });
    assert_eq!(code, 0);
    assert!(s.contains("\"pass\":true"));

    let args = CString::new("spectra --family X").unwrap();
    assert!(unsafe { hb_run_json(args.as_ptr(), &mut code) }.is_null());
    assert_eq!(code, 2);
}

#[test]
fn geodesic_starts_at_base_point() {
    let mut z = [0.0; 4];
    assert_eq!(unsafe { hb_geodesic_point(0.6, 0.0, 0.8, 0.3, 0.0, z.as_mut_ptr()) }, HbStatus::Ok);
    assert!((z[0]).abs() < 1e-14 && (z[2] - 1.0).abs() < 1e-14);
    assert_eq!(unsafe { hb_geodesic_point(1.0, 1.0, 1.0, 0.3, 0.0, z.as_mut_ptr()) }, HbStatus::InvalidArgument);
}

#[test]
fn header_declares_every_export() {
    let header = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/hopf_berger.h");
    let text = std::fs::read_to_string(header).unwrap();
    for f in [
        "hb_version",
        "hb_last_error_message",
        "hb_string_free",
        "hb_model_new",
        "hb_model_free",
        "hb_model_dims",
        "hb_curvature",
        "hb_sectional",
        "hb_jacobi_eigenvalues",
        "hb_tg_certificate",
        "hb_catalog_json",
        "hb_geodesic_point",
        "hb_run_json",
    ] {
        assert!(text.contains(&format!("{f}(")), "{f} missing from header");
    }
    let v = unsafe { CStr::from_ptr(hb_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let src = std::env::temp_dir().join(format!("hb_header_{}.c", std::process::id()));
    std::fs::write(&src, "#include \"hopf_berger.h\"\nint main(void) { return hb_version() == NULL; }\n").unwrap();
    let status = std::process::Command::new("cc").arg("-fsyntax-only").arg("-Wall").arg("-I").arg(&dir).arg(&src).status();
    let _ = std::fs::remove_file(&src);
    match status {
        Ok(s) => assert!(s.success(), "header failed to compile"),
        Err(_) => eprintln!("no C compiler; skipped"),
    }
}
