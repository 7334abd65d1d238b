//! C ABI over the `passivity` library.
//!
//! Models live behind an opaque handle. Every fallible call returns a
//! [`PassivityStatus`]; on failure the message is kept per thread and read
//! with [`passivity_last_error`]. Matrices are dense, row-major, with real
//! and imaginary parts in separate arrays. A null imaginary array means zero.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex;
use passivity::kernels::{CMatrix, Hermitian, Tolerances};
use passivity::passify::{self, NormKind};
use passivity::system::StateSpaceModel;
use passivity::{kyp, radius, xi, Error};

/// Opaque state-space model `{A, B, C, D}`.
pub struct PassivityModel {
    inner: StateSpaceModel,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PassivityStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    /// The input lies outside the operation's domain (e.g. not passive).
    Domain = 3,
    Numerical = 4,
    Convergence = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PassivityXiMethod {
    Bisection = 0,
    EigenvalueBased = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PassivityNorm {
    Two = 0,
    Frobenius = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassivityTolerances {
    pub rank_tol: f64,
    pub psd_tol: f64,
    pub eig_tol: f64,
    pub circle_tol: f64,
    pub golden_tol: f64,
    pub bisect_tau: f64,
}

impl From<Tolerances> for PassivityTolerances {
    fn from(t: Tolerances) -> Self {
        PassivityTolerances {
            rank_tol: t.rank_tol,
            psd_tol: t.psd_tol,
            eig_tol: t.eig_tol,
            circle_tol: t.circle_tol,
            golden_tol: t.golden_tol,
            bisect_tau: t.bisect_tau,
        }
    }
}

impl From<PassivityTolerances> for Tolerances {
    fn from(t: PassivityTolerances) -> Self {
        Tolerances {
            rank_tol: t.rank_tol,
            psd_tol: t.psd_tol,
            eig_tol: t.eig_tol,
            circle_tol: t.circle_tol,
            golden_tol: t.golden_tol,
            bisect_tau: t.bisect_tau,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> PassivityStatus {
    match e {
        Error::Input(_) | Error::Dimension { .. } | Error::Parse { .. } => PassivityStatus::InvalidInput,
        Error::Convergence { .. } => PassivityStatus::Convergence,
        e if e.is_domain() => PassivityStatus::Domain,
        _ => PassivityStatus::Numerical,
    }
}

enum Fail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> PassivityStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PassivityStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            PassivityStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            PassivityStatus::Panic
        }
    }
}

fn nonnull<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    // SAFETY: the caller passes either null or a valid pointer.
    unsafe { p.as_ref() }.ok_or(Fail::Null(what))
}

fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    // SAFETY: the caller passes either null or a valid, writable pointer.
    unsafe { p.as_mut() }.ok_or(Fail::Null(what))
}

/// Reads an `r × c` row-major matrix. `re` must hold `r·c` values, as must `im` unless null.
fn read_matrix(re: *const f64, im: *const f64, r: usize, c: usize, what: &'static str) -> Result<CMatrix, Fail> {
    if re.is_null() {
        return Err(Fail::Null(what));
    }
    let len = r * c;
    // SAFETY: the caller guarantees `len` readable values behind non-null pointers.
    let re = unsafe { std::slice::from_raw_parts(re, len) };
    let im = (!im.is_null()).then(|| unsafe { std::slice::from_raw_parts(im, len) });
    Ok(CMatrix::from_fn(r, c, |i, j| {
        Complex::new(re[i * c + j], im.map_or(0.0, |v| v[i * c + j]))
    }))
}

fn tolerances(t: *const PassivityTolerances) -> Result<Tolerances, Fail> {
    // SAFETY: null or a valid pointer.
    let t: Tolerances = unsafe { t.as_ref() }.map_or_else(Tolerances::default, |t| (*t).into());
    t.validate()?;
    Ok(t)
}

fn certificate(model: &StateSpaceModel, x_re: *const f64, x_im: *const f64) -> Result<Hermitian, Fail> {
    let n = model.n();
    if x_re.is_null() {
        return Ok(Hermitian::identity(n));
    }
    Ok(Hermitian::new(read_matrix(x_re, x_im, n, n, "x_re")?)?)
}

/// Default tolerances.
#[no_mangle]
pub extern "C" fn passivity_tolerances_default() -> PassivityTolerances {
    Tolerances::default().into()
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn passivity_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn passivity_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a model with `n` states and `m` ports. The `*_im` arrays may be null.
///
/// # Safety
/// Each non-null array must hold the number of values its shape requires:
/// `A` n·n, `B` n·m, `C` m·n, `D` m·m. `out_model` must be writable.
#[no_mangle]
pub unsafe extern "C" fn passivity_model_new(
    n: usize,
    m: usize,
    a_re: *const f64,
    a_im: *const f64,
    b_re: *const f64,
    b_im: *const f64,
    c_re: *const f64,
    c_im: *const f64,
    d_re: *const f64,
    d_im: *const f64,
    out_model: *mut *mut PassivityModel,
) -> PassivityStatus {
    guard(|| {
        let slot = out(out_model, "out_model")?;
        *slot = ptr::null_mut();
        let inner = StateSpaceModel::new(
            read_matrix(a_re, a_im, n, n, "a_re")?,
            read_matrix(b_re, b_im, n, m, "b_re")?,
            read_matrix(c_re, c_im, m, n, "c_re")?,
            read_matrix(d_re, d_im, m, m, "d_re")?,
        )?;
        *slot = Box::into_raw(Box::new(PassivityModel { inner }));
        Ok(())
    })
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `model` must come from `passivity_model_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn passivity_model_free(model: *mut PassivityModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be a live handle; `n` and `m` writable.
#[no_mangle]
pub unsafe extern "C" fn passivity_model_dims(model: *const PassivityModel, n: *mut usize, m: *mut usize) -> PassivityStatus {
    guard(|| {
        let model = &nonnull(model, "model")?.inner;
        *out(n, "n")? = model.n();
        *out(m, "m")? = model.m();
        Ok(())
    })
}

/// Writes 1 if the model is strictly passive, 0 otherwise.
///
/// # Safety
/// `model` must be a live handle; `tol` null or valid; `result` writable.
#[no_mangle]
pub unsafe extern "C" fn passivity_is_strictly_passive(
    model: *const PassivityModel,
    tol: *const PassivityTolerances,
    result: *mut c_int,
) -> PassivityStatus {
    guard(|| {
        let model = &nonnull(model, "model")?.inner;
        let t = tolerances(tol)?;
        let result = out(result, "result")?;
        let sm = xi::shift_model(model, 0.0, xi::Direction::Forward)?;
        *result = c_int::from(xi::strictly_passive(&sm, &t)?);
        Ok(())
    })
}

/// X-passivity radius `ρ_ℳ(X)`. A null `x_re` means `X = I`.
///
/// # Safety
/// `model` must be a live handle; `x_re`/`x_im` null or n·n values;
/// `tol` null or valid; `rho` writable.
#[no_mangle]
pub unsafe extern "C" fn passivity_x_radius(
    model: *const PassivityModel,
    x_re: *const f64,
    x_im: *const f64,
    tol: *const PassivityTolerances,
    rho: *mut f64,
) -> PassivityStatus {
    guard(|| {
        let model = &nonnull(model, "model")?.inner;
        let t = tolerances(tol)?;
        let rho = out(rho, "rho")?;
        let x = certificate(model, x_re, x_im)?;
        *rho = radius::x_passivity_radius(model, &x, &t)?.rho;
        Ok(())
    })
}

/// `ξ*(X)`, the largest LMI shift feasible at `X`. A null `x_re` means `X = I`.
///
/// # Safety
/// As for `passivity_x_radius`.
#[no_mangle]
pub unsafe extern "C" fn passivity_xi_star(
    model: *const PassivityModel,
    x_re: *const f64,
    x_im: *const f64,
    tol: *const PassivityTolerances,
    result: *mut f64,
) -> PassivityStatus {
    guard(|| {
        let model = &nonnull(model, "model")?.inner;
        let t = tolerances(tol)?;
        let result = out(result, "result")?;
        let x = certificate(model, x_re, x_im)?;
        let cert = kyp::classify_certificate(&x, model, &t)?;
        *result = xi::xi_star(model, &cert, &t)?;
        Ok(())
    })
}

/// Bracket `[lo, hi]` of `Ξ`, the supremum of `ξ*` over certificates.
///
/// # Safety
/// `model` must be a live handle; `tol` null or valid; `lo`, `hi` writable.
#[no_mangle]
pub unsafe extern "C" fn passivity_xi_sup(
    model: *const PassivityModel,
    tau: f64,
    method: PassivityXiMethod,
    tol: *const PassivityTolerances,
    lo: *mut f64,
    hi: *mut f64,
) -> PassivityStatus {
    guard(|| {
        let model = &nonnull(model, "model")?.inner;
        let t = tolerances(tol)?;
        let (lo, hi) = (out(lo, "lo")?, out(hi, "hi")?);
        let r = match method {
            PassivityXiMethod::Bisection => xi::xi_sup_bisection(model, tau, &t)?,
            PassivityXiMethod::EigenvalueBased => xi::xi_sup_eigenvalue(model, tau, &t)?,
        };
        *lo = r.xi_lo;
        *hi = r.xi_hi;
        Ok(())
    })
}

/// Distance to passivity: the constrained shift `Ξ` and the norm of the
/// refined perturbation.
///
/// # Safety
/// `model` must be a live handle; `tol` null or valid; `xi_big`, `norm_out` writable.
#[no_mangle]
pub unsafe extern "C" fn passivity_distance_to_passivity(
    model: *const PassivityModel,
    tau: f64,
    norm: PassivityNorm,
    budget: usize,
    tol: *const PassivityTolerances,
    xi_big: *mut f64,
    norm_out: *mut f64,
) -> PassivityStatus {
    guard(|| {
        let model = &nonnull(model, "model")?.inner;
        let t = tolerances(tol)?;
        let (xi_big, norm_out) = (out(xi_big, "xi_big")?, out(norm_out, "norm_out")?);
        let kind = match norm {
            PassivityNorm::Two => NormKind::Two,
            PassivityNorm::Frobenius => NormKind::Frobenius,
        };
        let r = passify::distance_to_passivity(model, tau, kind, budget, &t)?;
        *xi_big = r.xi_big;
        *norm_out = match kind {
            NormKind::Two => r.sigma2,
            NormKind::Frobenius => r.sigma_frob,
        };
        Ok(())
    })
}

/// Smallest `ξ ≥ 0` with `A/(1+ξ)` stable.
///
/// # Safety
/// `model` must be a live handle; `tol` null or valid; `result` writable.
#[no_mangle]
pub unsafe extern "C" fn passivity_distance_to_stability(
    model: *const PassivityModel,
    tol: *const PassivityTolerances,
    result: *mut f64,
) -> PassivityStatus {
    guard(|| {
        let model = &nonnull(model, "model")?.inner;
        let t = tolerances(tol)?;
        let result = out(result, "result")?;
        *result = passify::distance_to_stability(model.a(), &t)?.xi;
        Ok(())
    })
}
