//! C ABI for the rollingball convex-analysis library.
//!
//! Conventions:
//! - objects are opaque handles created by `rb_*_parse_json` / `rb_regularize`
//!   and released by the matching `rb_*_free`;
//! - every fallible call returns an [`RbStatus`]; on failure
//!   [`rb_last_error_message`] holds a thread-local description;
//! - vectors are passed as `(pointer, len)` with caller-owned buffers, and
//!   matrices are written row-major into `len * len` buffers.
//!
//! The C header is generated into `include/rollingball.h` at build time.

use rollingball::alexandrov::hessian_at_touch;
use rollingball::convex::{chebyshev_center, ConvexBody};
use rollingball::error::Error;
use rollingball::funcreg::{disagreement_measure, regularize, MeasureMethod, PCQFunction, RegularizedFunction};
use rollingball::geometry::{BoxRegion, Vector};
use rollingball::glue::convex_envelope;
use rollingball::io::{parse_body_json, parse_function_json, Body};
use rollingball::morphology::{boundary_measure_mc, contact_set_2d, lambda_factor};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Status code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RbStatus {
    Ok = 0,
    NullPointer = 1,
    Utf8Error = 2,
    ParseError = 3,
    InvalidArgument = 4,
    InfeasibleBody = 5,
    UnboundedBody = 6,
    DegenerateBody = 7,
    ConvergenceFailure = 8,
    DomainExceeded = 9,
    NotTouchPoint = 10,
    KinkAtCenter = 11,
    RuntimeError = 12,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> RbStatus {
    match err {
        Error::InvalidInput(_) => RbStatus::ParseError,
        Error::InfeasibleBody(_) => RbStatus::InfeasibleBody,
        Error::UnboundedBody(_) => RbStatus::UnboundedBody,
        Error::DegenerateBody(_) | Error::DegenerateGrid(_) => RbStatus::DegenerateBody,
        Error::ConvergenceFailure(_) | Error::InnerSolveFailure(_) => {
            RbStatus::ConvergenceFailure
        }
        Error::DomainExceeded(_) => RbStatus::DomainExceeded,
        Error::NotTouchPoint(_) => RbStatus::NotTouchPoint,
        Error::KinkAtCenter(_) => RbStatus::KinkAtCenter,
        Error::InvalidSampleCount(_) | Error::OriginNotInterior(_) => RbStatus::InvalidArgument,
        _ => RbStatus::RuntimeError,
    }
}

fn fail(err: Error) -> RbStatus {
    let status = status_of(&err);
    set_error(&err.to_string());
    status
}

/// Run `f` with panics converted to `RuntimeError`.
fn guarded(f: impl FnOnce() -> RbStatus) -> RbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            RbStatus::RuntimeError
        }
    }
}

unsafe fn cstr_to_str<'a>(ptr: *const c_char) -> Result<&'a str, RbStatus> {
    if ptr.is_null() {
        set_error("null string pointer");
        return Err(RbStatus::NullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string is not valid UTF-8");
        RbStatus::Utf8Error
    })
}

unsafe fn slice_arg<'a>(ptr: *const f64, len: usize) -> Result<&'a [f64], RbStatus> {
    if ptr.is_null() {
        set_error("null vector pointer");
        return Err(RbStatus::NullPointer);
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

/// Opaque convex body (halfspace intersection or polygon).
pub struct RbBody(Body);

/// Opaque piecewise-quadratic convex function.
pub struct RbFunction(PCQFunction);

/// Opaque epigraph-opening regularization of a function.
pub struct RbRegularized(RegularizedFunction);

/// Exact 2D opening measures plus the dilation factor.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RbOpeningMeasures {
    pub boundary_len: f64,
    pub contact_len: f64,
    pub lost_len: f64,
    pub gained_len: f64,
    pub sym_diff_len: f64,
    pub lambda: f64,
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rb_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

/// Thread-local message describing the most recent failure.
#[no_mangle]
pub extern "C" fn rb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Parse a body JSON document into a handle.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rb_body_parse_json(
    json: *const c_char,
    out: *mut *mut RbBody,
) -> RbStatus {
    guarded(|| {
        if out.is_null() {
            set_error("null output pointer");
            return RbStatus::NullPointer;
        }
        let text = match cstr_to_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match parse_body_json(text) {
            Ok(body) => {
                *out = Box::into_raw(Box::new(RbBody(body)));
                RbStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Release a body handle.
///
/// # Safety
/// `body` must come from `rb_body_parse_json` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn rb_body_free(body: *mut RbBody) {
    if !body.is_null() {
        drop(Box::from_raw(body));
    }
}

/// Ambient dimension of the body.
///
/// # Safety
/// Valid `body` handle and non-null `out`.
#[no_mangle]
pub unsafe extern "C" fn rb_body_dim(body: *const RbBody, out: *mut usize) -> RbStatus {
    guarded(|| {
        if body.is_null() || out.is_null() {
            set_error("null pointer");
            return RbStatus::NullPointer;
        }
        *out = (*body).0.dim();
        RbStatus::Ok
    })
}

/// Chebyshev center and radius; `out_center` must hold `dim` doubles.
///
/// # Safety
/// Valid handle and output buffers of sufficient length.
#[no_mangle]
pub unsafe extern "C" fn rb_body_chebyshev(
    body: *const RbBody,
    out_center: *mut f64,
    out_radius: *mut f64,
) -> RbStatus {
    guarded(|| {
        if body.is_null() || out_center.is_null() || out_radius.is_null() {
            set_error("null pointer");
            return RbStatus::NullPointer;
        }
        let polytope = match (*body).0.to_polytope() {
            Ok(p) => p,
            Err(e) => return fail(e),
        };
        let (c, r) = chebyshev_center(&polytope);
        std::ptr::copy_nonoverlapping(c.as_slice().as_ptr(), out_center, c.dim());
        *out_radius = r;
        RbStatus::Ok
    })
}

/// Nearest-point projection; `x` and `out` hold `len = dim` doubles.
///
/// # Safety
/// Valid handle and buffers of length `len`.
#[no_mangle]
pub unsafe extern "C" fn rb_body_project(
    body: *const RbBody,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> RbStatus {
    guarded(|| {
        if body.is_null() || out.is_null() {
            set_error("null pointer");
            return RbStatus::NullPointer;
        }
        let xs = match slice_arg(x, len) {
            Ok(s) => s,
            Err(s) => return s,
        };
        if len != (*body).0.dim() {
            set_error("dimension mismatch");
            return RbStatus::InvalidArgument;
        }
        let point = Vector::from_slice(xs);
        let result = match &(*body).0 {
            Body::Polytope(p) => p.project(&point),
            Body::Polygon(p) => p.project(&point),
        };
        match result {
            Ok(p) => {
                std::ptr::copy_nonoverlapping(p.as_slice().as_ptr(), out, len);
                RbStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Support value in a unit direction.
///
/// # Safety
/// Valid handle, `dir` of length `len`, non-null `out_value`.
#[no_mangle]
pub unsafe extern "C" fn rb_body_support(
    body: *const RbBody,
    dir: *const f64,
    len: usize,
    out_value: *mut f64,
) -> RbStatus {
    guarded(|| {
        if body.is_null() || out_value.is_null() {
            set_error("null pointer");
            return RbStatus::NullPointer;
        }
        let ds = match slice_arg(dir, len) {
            Ok(s) => s,
            Err(s) => return s,
        };
        let u = Vector::from_slice(ds);
        let result = match &(*body).0 {
            Body::Polytope(p) => p.support(&u),
            Body::Polygon(p) => p.support(&u),
        };
        match result {
            Ok((v, _)) => {
                *out_value = v;
                RbStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Exact 2D opening measures and the dilation factor for radius `r`.
///
/// # Safety
/// Valid handle and non-null `out`.
#[no_mangle]
pub unsafe extern "C" fn rb_body_opening_measures(
    body: *const RbBody,
    radius: f64,
    out: *mut RbOpeningMeasures,
) -> RbStatus {
    guarded(|| {
        if body.is_null() || out.is_null() {
            set_error("null pointer");
            return RbStatus::NullPointer;
        }
        let polygon = match (*body).0.polygon() {
            Ok(p) => p,
            Err(e) => return fail(e),
        };
        let polytope = match (*body).0.to_polytope() {
            Ok(p) => p,
            Err(e) => return fail(e),
        };
        let decomp = match contact_set_2d(&polygon, radius) {
            Ok(d) => d,
            Err(e) => return fail(e),
        };
        let (lambda, _) = match lambda_factor(&polytope, radius) {
            Ok(l) => l,
            Err(e) => return fail(e),
        };
        *out = RbOpeningMeasures {
            boundary_len: decomp.boundary_len,
            contact_len: decomp.contact_len,
            lost_len: decomp.lost_len,
            gained_len: decomp.gained_len,
            sym_diff_len: decomp.sym_diff_len,
            lambda,
        };
        RbStatus::Ok
    })
}

/// Monte Carlo estimate of the lost boundary measure.
///
/// # Safety
/// Valid handle and non-null outputs.
#[no_mangle]
pub unsafe extern "C" fn rb_body_boundary_mc(
    body: *const RbBody,
    radius: f64,
    samples: u64,
    seed: u64,
    out_estimate: *mut f64,
    out_std_error: *mut f64,
) -> RbStatus {
    guarded(|| {
        if body.is_null() || out_estimate.is_null() || out_std_error.is_null() {
            set_error("null pointer");
            return RbStatus::NullPointer;
        }
        let polytope = match (*body).0.to_polytope() {
            Ok(p) => p,
            Err(e) => return fail(e),
        };
        match boundary_measure_mc(&polytope, radius, samples, seed) {
            Ok(est) => {
                *out_estimate = est.estimate;
                *out_std_error = est.std_error;
                RbStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Parse a function JSON document into a handle.
///
/// # Safety
/// `json` must be NUL-terminated; `out` non-null.
#[no_mangle]
pub unsafe extern "C" fn rb_function_parse_json(
    json: *const c_char,
    out: *mut *mut RbFunction,
) -> RbStatus {
    guarded(|| {
        if out.is_null() {
            set_error("null output pointer");
            return RbStatus::NullPointer;
        }
        let text = match cstr_to_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match parse_function_json(text) {
            Ok(f) => {
                *out = Box::into_raw(Box::new(RbFunction(f)));
                RbStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Release a function handle.
///
/// # Safety
/// `f` must come from `rb_function_parse_json` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn rb_function_free(f: *mut RbFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Evaluate the function at `x` (length `len`).
///
/// # Safety
/// Valid handle and buffers.
#[no_mangle]
pub unsafe extern "C" fn rb_function_eval(
    f: *const RbFunction,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> RbStatus {
    guarded(|| {
        if f.is_null() || out.is_null() {
            set_error("null pointer");
            return RbStatus::NullPointer;
        }
        let xs = match slice_arg(x, len) {
            Ok(s) => s,
            Err(s) => return s,
        };
        if len != (*f).0.dim() {
            set_error("dimension mismatch");
            return RbStatus::InvalidArgument;
        }
        *out = (*f).0.eval(&Vector::from_slice(xs));
        RbStatus::Ok
    })
}

/// Build the epigraph-opening regularizer `g` of `f` for radius `delta`,
/// evaluable on `|x| <= domain_radius`.
///
/// # Safety
/// Valid function handle, non-null `out`.
#[no_mangle]
pub unsafe extern "C" fn rb_regularize(
    f: *const RbFunction,
    delta: f64,
    domain_radius: f64,
    out: *mut *mut RbRegularized,
) -> RbStatus {
    guarded(|| {
        if f.is_null() || out.is_null() {
            set_error("null pointer");
            return RbStatus::NullPointer;
        }
        match regularize(&(*f).0, delta, domain_radius) {
            Ok(g) => {
                *out = Box::into_raw(Box::new(RbRegularized(g)));
                RbStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Release a regularizer handle.
///
/// # Safety
/// `g` must come from `rb_regularize` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn rb_regularized_free(g: *mut RbRegularized) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Evaluate `g(x)`.
///
/// # Safety
/// Valid handle and buffers.
#[no_mangle]
pub unsafe extern "C" fn rb_regularized_value(
    g: *const RbRegularized,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> RbStatus {
    guarded(|| {
        if g.is_null() || out.is_null() {
            set_error("null pointer");
            return RbStatus::NullPointer;
        }
        let xs = match slice_arg(x, len) {
            Ok(s) => s,
            Err(s) => return s,
        };
        match (*g).0.value(&Vector::from_slice(xs)) {
            Ok(v) => {
                *out = v;
                RbStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Evaluate `grad g(x)` into `out` (length `len`).
///
/// # Safety
/// Valid handle and buffers of length `len`.
#[no_mangle]
pub unsafe extern "C" fn rb_regularized_gradient(
    g: *const RbRegularized,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> RbStatus {
    guarded(|| {
        if g.is_null() || out.is_null() {
            set_error("null pointer");
            return RbStatus::NullPointer;
        }
        let xs = match slice_arg(x, len) {
            Ok(s) => s,
            Err(s) => return s,
        };
        match (*g).0.gradient(&Vector::from_slice(xs)) {
            Ok(v) => {
                std::ptr::copy_nonoverlapping(v.as_slice().as_ptr(), out, len);
                RbStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Whether `g(x) = f(x)` within `tol`; writes 1 or 0 into `out`.
///
/// # Safety
/// Valid handle and buffers.
#[no_mangle]
pub unsafe extern "C" fn rb_regularized_is_touch(
    g: *const RbRegularized,
    x: *const f64,
    len: usize,
    tol: f64,
    out: *mut i32,
) -> RbStatus {
    guarded(|| {
        if g.is_null() || out.is_null() {
            set_error("null pointer");
            return RbStatus::NullPointer;
        }
        let xs = match slice_arg(x, len) {
            Ok(s) => s,
            Err(s) => return s,
        };
        match (*g).0.is_touch(&Vector::from_slice(xs), tol) {
            Ok(t) => {
                *out = i32::from(t);
                RbStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Grid measure of `{ g > f }` over the box `[lo, hi]^len` given
/// coordinatewise bounds.
///
/// # Safety
/// `lo`, `hi` of length `len`; non-null outputs.
#[no_mangle]
pub unsafe extern "C" fn rb_disagreement_measure_grid(
    g: *const RbRegularized,
    lo: *const f64,
    hi: *const f64,
    len: usize,
    per_axis: usize,
    out_measure: *mut f64,
    out_error: *mut f64,
) -> RbStatus {
    guarded(|| {
        if g.is_null() || out_measure.is_null() || out_error.is_null() {
            set_error("null pointer");
            return RbStatus::NullPointer;
        }
        let lo = match slice_arg(lo, len) {
            Ok(s) => s,
            Err(s) => return s,
        };
        let hi = match slice_arg(hi, len) {
            Ok(s) => s,
            Err(s) => return s,
        };
        let region = match BoxRegion::new(lo.to_vec(), hi.to_vec()) {
            Ok(r) => r,
            Err(e) => return fail(e),
        };
        match disagreement_measure(&(*g).0, &region, MeasureMethod::Grid { per_axis }) {
            Ok(est) => {
                *out_measure = est.measure;
                *out_error = est.error_bar;
                RbStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Candidate Hessian of `f` at a touch point; writes `len * len` doubles
/// row-major.
///
/// # Safety
/// Valid handle and output buffer of length `len * len`.
#[no_mangle]
pub unsafe extern "C" fn rb_hessian_at_touch(
    g: *const RbRegularized,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> RbStatus {
    guarded(|| {
        if g.is_null() || out.is_null() {
            set_error("null pointer");
            return RbStatus::NullPointer;
        }
        let xs = match slice_arg(x, len) {
            Ok(s) => s,
            Err(s) => return s,
        };
        match hessian_at_touch(&(*g).0, &Vector::from_slice(xs)) {
            Ok(d) => {
                std::ptr::copy_nonoverlapping(d.data.as_ptr(), out, len * len);
                RbStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Smooth maximum with the C^{1,1} cap; equals `fmax(x, y)` exactly when
/// `|x - y| >= 1`.
#[no_mangle]
pub extern "C" fn rb_smooth_max(x: f64, y: f64) -> f64 {
    rollingball::glue::smooth_max(x, y)
}

/// Lower convex hull of 1D samples: writes the envelope values at the
/// input nodes into `out` (length `len`).
///
/// # Safety
/// `xs`, `phi`, `out` of length `len`.
#[no_mangle]
pub unsafe extern "C" fn rb_envelope_1d(
    xs: *const f64,
    phi: *const f64,
    len: usize,
    out: *mut f64,
) -> RbStatus {
    guarded(|| {
        if out.is_null() {
            set_error("null pointer");
            return RbStatus::NullPointer;
        }
        let xs = match slice_arg(xs, len) {
            Ok(s) => s,
            Err(s) => return s,
        };
        let phi = match slice_arg(phi, len) {
            Ok(s) => s,
            Err(s) => return s,
        };
        let nodes: Vec<Vector> = xs.iter().map(|&x| Vector(vec![x])).collect();
        match convex_envelope(&nodes, phi) {
            Ok(env) => {
                std::ptr::copy_nonoverlapping(env.values().as_ptr(), out, len);
                RbStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}
