use std::ffi::CStr;
use std::ptr;

use passivity_ffi::*;

fn scalar(a: f64, b: f64, c: f64, d: f64) -> *mut PassivityModel {
    let mut h = ptr::null_mut();
    let s = unsafe {
        passivity_model_new(1, 1, &a, ptr::null(), &b, ptr::null(), &c, ptr::null(), &d, ptr::null(), &mut h)
    };
    assert_eq!(s, PassivityStatus::Ok);
    h
}

fn last_error() -> String {
    let p = passivity_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn m0_radius_and_xi() {
    let h = scalar(0.5, 1.0, 1.0, 1.0);
    let (mut n, mut m) = (0, 0);
    assert_eq!(unsafe { passivity_model_dims(h, &mut n, &mut m) }, PassivityStatus::Ok);
    assert_eq!((n, m), (1, 1));

    let mut flag = -1;
    assert_eq!(unsafe { passivity_is_strictly_passive(h, ptr::null(), &mut flag) }, PassivityStatus::Ok);
    assert_eq!(flag, 1);

    let expect = 1.25 - 1.0625f64.sqrt();
    let mut rho = 0.0;
    assert_eq!(unsafe { passivity_x_radius(h, ptr::null(), ptr::null(), ptr::null(), &mut rho) }, PassivityStatus::Ok);
    assert!((rho - expect).abs() < 1e-8);

    let mut star = 0.0;
    assert_eq!(unsafe { passivity_xi_star(h, ptr::null(), ptr::null(), ptr::null(), &mut star) }, PassivityStatus::Ok);
    assert!((star - expect).abs() < 1e-10);

    for method in [PassivityXiMethod::Bisection, PassivityXiMethod::EigenvalueBased] {
        let (mut lo, mut hi) = (0.0, 0.0);
        let s = unsafe { passivity_xi_sup(h, 1e-8, method, ptr::null(), &mut lo, &mut hi) };
        assert_eq!(s, PassivityStatus::Ok);
        assert!(lo <= expect + 1e-12 && expect <= hi + 1e-12 && hi - lo <= 1e-8 * (1.0 + 1e-9));
    }
    unsafe { passivity_model_free(h) };
}

#[test]
fn distances() {
    let h = scalar(0.5, 1.0, 1.0, -0.2);
    let (mut xi, mut norm) = (0.0, 0.0);
    let s = unsafe { passivity_distance_to_passivity(h, 1e-8, PassivityNorm::Two, 5000, ptr::null(), &mut xi, &mut norm) };
    assert_eq!(s, PassivityStatus::Ok);
    // root of (ξ − 0.2)(1.5 + ξ) = 1
    let oracle = (-1.3 + (1.69f64 + 5.2).sqrt()) / 2.0;
    assert!((xi - oracle).abs() < 1e-6 && norm <= xi + 1e-9);
    unsafe { passivity_model_free(h) };

    let h = scalar(2.0, 1.0, 1.0, 1.0);
    let mut st = 0.0;
    assert_eq!(unsafe { passivity_distance_to_stability(h, ptr::null(), &mut st) }, PassivityStatus::Ok);
    assert!((st - 1.0).abs() < 1e-12);
    unsafe { passivity_model_free(h) };
}

#[test]
fn error_paths() {
    let mut h = ptr::null_mut();
    let a = [0.5, 0.0, 0.0];
    // A needs 1 value, but n = 0 is rejected before that matters
    let s = unsafe {
        passivity_model_new(0, 1, a.as_ptr(), ptr::null(), a.as_ptr(), ptr::null(), a.as_ptr(), ptr::null(), a.as_ptr(), ptr::null(), &mut h)
    };
    assert_eq!(s, PassivityStatus::InvalidInput);
    assert!(h.is_null());
    assert!(!last_error().is_empty());

    let s = unsafe { passivity_model_new(1, 1, ptr::null(), ptr::null(), &1.0, ptr::null(), &1.0, ptr::null(), &1.0, ptr::null(), &mut h) };
    assert_eq!(s, PassivityStatus::NullPointer);
    assert!(last_error().contains("a_re"));

    let nan = f64::NAN;
    let s = unsafe { passivity_model_new(1, 1, &nan, ptr::null(), &1.0, ptr::null(), &1.0, ptr::null(), &1.0, ptr::null(), &mut h) };
    assert_eq!(s, PassivityStatus::InvalidInput);

    // X = 1 does not certify a non-passive model
    let np = scalar(0.5, 1.0, 1.0, -0.2);
    let mut rho = 0.0;
    assert_eq!(unsafe { passivity_x_radius(np, ptr::null(), ptr::null(), ptr::null(), &mut rho) }, PassivityStatus::Domain);
    assert!(last_error().contains("positive definite"));

    let mut bad = passivity_tolerances_default();
    bad.psd_tol = -1.0;
    assert_eq!(unsafe { passivity_x_radius(np, ptr::null(), ptr::null(), &bad, &mut rho) }, PassivityStatus::InvalidInput);
    assert_eq!(unsafe { passivity_x_radius(np, ptr::null(), ptr::null(), ptr::null(), ptr::null_mut()) }, PassivityStatus::NullPointer);
    assert_eq!(unsafe { passivity_x_radius(ptr::null(), ptr::null(), ptr::null(), ptr::null(), &mut rho) }, PassivityStatus::NullPointer);

    let mut flag = 0;
    assert_eq!(unsafe { passivity_is_strictly_passive(np, ptr::null(), &mut flag) }, PassivityStatus::Ok);
    assert!(passivity_last_error().is_null());
    assert_eq!(flag, 0);
    unsafe { passivity_model_free(np) };
    unsafe { passivity_model_free(ptr::null_mut()) };
}

#[test]
fn complex_entries_and_explicit_certificate() {
    // a unitary similarity of a real model keeps the radius at X = I
    let (a, b, c, d) = ([0.5], [0.0, 1.0], [0.0, -1.0], [1.0]);
    let mut h = ptr::null_mut();
    let s = unsafe { passivity_model_new(1, 1, a.as_ptr(), ptr::null(), &b[0], &b[1], &c[0], &c[1], d.as_ptr(), ptr::null(), &mut h) };
    assert_eq!(s, PassivityStatus::Ok);
    let (mut r1, mut r2) = (0.0, 0.0);
    let x = [1.0];
    assert_eq!(unsafe { passivity_x_radius(h, ptr::null(), ptr::null(), ptr::null(), &mut r1) }, PassivityStatus::Ok);
    assert_eq!(unsafe { passivity_x_radius(h, x.as_ptr(), ptr::null(), ptr::null(), &mut r2) }, PassivityStatus::Ok);
    assert_eq!(r1, r2);
    assert!((r1 - (1.25 - 1.0625f64.sqrt())).abs() < 1e-8);
    unsafe { passivity_model_free(h) };
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(passivity_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
