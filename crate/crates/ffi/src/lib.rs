//! C interface to `aniso-core`.
//!
//! Objects cross the boundary as opaque handles created by `aniso_*_new*` and released by
//! the matching `aniso_*_free`. Every fallible call returns an [`AnisoStatus`]; on failure
//! the message is available from [`aniso_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use aniso_core::solver::{generate_mesh, solve_continuation, BoundaryCondition, ProblemSpec, Source};
use aniso_core::verify::verify_convex_estimate;
use aniso_core::{AnisotropicNorm, Domain2D, Error, StressOperator, YoungFunction};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnisoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    SingularPoint = 3,
    AssumptionViolated = 4,
    Configuration = 5,
    UnsupportedKind = 6,
    WindowTooLarge = 7,
    Degenerate = 8,
    Mesh = 9,
    Precondition = 10,
    Numerical = 11,
    Convergence = 12,
    Io = 13,
    Panic = 14,
}

impl From<&Error> for AnisoStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidInput(_) => AnisoStatus::InvalidInput,
            Error::SingularPoint(_) => AnisoStatus::SingularPoint,
            Error::AssumptionViolated(_) => AnisoStatus::AssumptionViolated,
            Error::Configuration(_) => AnisoStatus::Configuration,
            Error::UnsupportedKind(_) => AnisoStatus::UnsupportedKind,
            Error::WindowTooLarge(_) => AnisoStatus::WindowTooLarge,
            Error::Degenerate(_) => AnisoStatus::Degenerate,
            Error::Mesh(_) => AnisoStatus::Mesh,
            Error::Precondition(_) => AnisoStatus::Precondition,
            Error::Numerical(_) => AnisoStatus::Numerical,
            Error::Convergence { .. } => AnisoStatus::Convergence,
            Error::Io(_) => AnisoStatus::Io,
        }
    }
}

/// Opaque anisotropic norm.
pub struct AnisoNorm(AnisotropicNorm);
/// Opaque Young function.
pub struct AnisoYoung(YoungFunction);
/// Opaque stress operator, optionally regularized.
pub struct AnisoOperator(StressOperator);
/// Opaque planar domain.
pub struct AnisoDomain(Domain2D);
/// Opaque finite element solution: mesh vertices and nodal values.
pub struct AnisoSolution {
    vertices: Vec<[f64; 2]>,
    values: Vec<f64>,
    final_epsilon: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f`, converting errors and panics into a status and the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> AnisoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AnisoStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("null pointer: {what}"));
            AnisoStatus::NullPointer
        }
        Ok(Err(Failure::Core(e))) => {
            set_last_error(e.to_string());
            AnisoStatus::from(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            AnisoStatus::Panic
        }
    }
}

enum Failure {
    Null(&'static str),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

unsafe fn handle<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &'static str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &'static str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn write_slice(out: *mut f64, values: &[f64], what: &'static str) -> Result<(), Failure> {
    if values.is_empty() {
        return Ok(());
    }
    if out.is_null() {
        return Err(Failure::Null(what));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    Ok(())
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message of the last failed call on this thread, or null. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn aniso_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn aniso_clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn aniso_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version string"),
    };
    VERSION.as_ptr()
}

/// # Safety
/// `out` must be valid for writing a handle pointer.
#[no_mangle]
pub unsafe extern "C" fn aniso_norm_new_euclidean(out: *mut *mut AnisoNorm) -> AnisoStatus {
    guard(|| write_out(out, boxed(AnisoNorm(AnisotropicNorm::euclidean(2)?)), "out"))
}

/// `H(xi) = sqrt(a_1 xi_1^2 + a_2 xi_2^2)`.
///
/// # Safety
/// `out` must be valid for writing a handle pointer.
#[no_mangle]
pub unsafe extern "C" fn aniso_norm_new_weighted(a1: f64, a2: f64, out: *mut *mut AnisoNorm) -> AnisoStatus {
    guard(|| write_out(out, boxed(AnisoNorm(AnisotropicNorm::weighted_quadratic(&[a1, a2])?)), "out"))
}

/// `H(xi) = (alpha |xi|_q^p + beta |xi|^p)^(1/p)`.
///
/// # Safety
/// `out` must be valid for writing a handle pointer.
#[no_mangle]
pub unsafe extern "C" fn aniso_norm_new_blend(p: f64, q: f64, alpha: f64, beta: f64, out: *mut *mut AnisoNorm) -> AnisoStatus {
    guard(|| write_out(out, boxed(AnisoNorm(AnisotropicNorm::blend(2, p, q, alpha, beta)?)), "out"))
}

/// # Safety
/// `norm` must be null or a handle from `aniso_norm_new_*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn aniso_norm_free(norm: *mut AnisoNorm) {
    free(norm)
}

/// `H(xi)` for a planar `xi`.
///
/// # Safety
/// `xi` must point to 2 doubles and `out` to 1.
#[no_mangle]
pub unsafe extern "C" fn aniso_norm_value(norm: *const AnisoNorm, xi: *const f64, out: *mut f64) -> AnisoStatus {
    guard(|| {
        let n = handle(norm, "norm")?;
        let v = n.0.value(slice(xi, 2, "xi")?)?;
        write_out(out, v, "out")
    })
}

/// Dual norm `H_0(x)`.
///
/// # Safety
/// `x` must point to 2 doubles and `out` to 1.
#[no_mangle]
pub unsafe extern "C" fn aniso_norm_dual_value(norm: *const AnisoNorm, x: *const f64, out: *mut f64) -> AnisoStatus {
    guard(|| {
        let n = handle(norm, "norm")?;
        let x = slice(x, 2, "x")?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite component".into()).into());
        }
        write_out(out, n.0.dual_value(x), "out")
    })
}

/// `B(t) = t^p`.
///
/// # Safety
/// `out` must be valid for writing a handle pointer.
#[no_mangle]
pub unsafe extern "C" fn aniso_young_new_power(p: f64, out: *mut *mut AnisoYoung) -> AnisoStatus {
    guard(|| write_out(out, boxed(AnisoYoung(YoungFunction::power(p)?)), "out"))
}

/// `B(t) = t^p log^q(c + t)`.
///
/// # Safety
/// `out` must be valid for writing a handle pointer.
#[no_mangle]
pub unsafe extern "C" fn aniso_young_new_power_log(p: f64, q: f64, c: f64, out: *mut *mut AnisoYoung) -> AnisoStatus {
    guard(|| write_out(out, boxed(AnisoYoung(YoungFunction::power_log(p, q, c)?)), "out"))
}

/// # Safety
/// `young` must be null or a handle from `aniso_young_new_*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn aniso_young_free(young: *mut AnisoYoung) {
    free(young)
}

/// Stress operator from copies of `norm` and `young`; `epsilon` in (0, 1) regularizes, 0 does not.
///
/// # Safety
/// `norm` and `young` must be live handles; `out` must be valid for writing a handle pointer.
#[no_mangle]
pub unsafe extern "C" fn aniso_operator_new(
    norm: *const AnisoNorm,
    young: *const AnisoYoung,
    epsilon: f64,
    out: *mut *mut AnisoOperator,
) -> AnisoStatus {
    guard(|| {
        let op = StressOperator::new(handle(norm, "norm")?.0.clone(), handle(young, "young")?.0.clone());
        let op = if epsilon == 0.0 { op } else { op.with_epsilon(epsilon)? };
        write_out(out, boxed(AnisoOperator(op)), "out")
    })
}

/// # Safety
/// `op` must be null or a handle from `aniso_operator_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn aniso_operator_free(op: *mut AnisoOperator) {
    free(op)
}

/// `A(xi)` into `out[0..2]`.
///
/// # Safety
/// `xi` must point to 2 doubles and `out` to 2 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn aniso_operator_stress(op: *const AnisoOperator, xi: *const f64, out: *mut f64) -> AnisoStatus {
    guard(|| {
        let op = handle(op, "op")?;
        let xi = slice(xi, 2, "xi")?;
        if xi.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite component".into()).into());
        }
        let s = op.0.stress2([xi[0], xi[1]]);
        write_slice(out, &s, "out")
    })
}

/// Row-major `D A_eps(xi)` into `out[0..4]`; needs a regularized operator and `xi != 0`.
///
/// # Safety
/// `xi` must point to 2 doubles and `out` to 4 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn aniso_operator_jacobian(op: *const AnisoOperator, xi: *const f64, out: *mut f64) -> AnisoStatus {
    guard(|| {
        let op = handle(op, "op")?;
        let j = op.0.stress_jacobian(slice(xi, 2, "xi")?)?;
        write_slice(out, &[j[(0, 0)], j[(0, 1)], j[(1, 0)], j[(1, 1)]], "out")
    })
}

/// `Lambda max{1, s_b} / (lambda min{1, i_b})`.
///
/// # Safety
/// `out` must point to 1 writable double.
#[no_mangle]
pub unsafe extern "C" fn aniso_operator_ellipticity_ratio(op: *const AnisoOperator, out: *mut f64) -> AnisoStatus {
    guard(|| write_out(out, handle(op, "op")?.0.ellipticity_ratio(), "out"))
}

/// # Safety
/// `out` must be valid for writing a handle pointer.
#[no_mangle]
pub unsafe extern "C" fn aniso_domain_new_disk(radius: f64, out: *mut *mut AnisoDomain) -> AnisoStatus {
    guard(|| write_out(out, boxed(AnisoDomain(Domain2D::disk(radius)?)), "out"))
}

/// # Safety
/// `out` must be valid for writing a handle pointer.
#[no_mangle]
pub unsafe extern "C" fn aniso_domain_new_ellipse(a: f64, b: f64, out: *mut *mut AnisoDomain) -> AnisoStatus {
    guard(|| write_out(out, boxed(AnisoDomain(Domain2D::ellipse(a, b)?)), "out"))
}

/// `|x/a|^m + |y/b|^m < 1` with even `m >= 2`.
///
/// # Safety
/// `out` must be valid for writing a handle pointer.
#[no_mangle]
pub unsafe extern "C" fn aniso_domain_new_superellipse(a: f64, b: f64, m: u32, out: *mut *mut AnisoDomain) -> AnisoStatus {
    guard(|| write_out(out, boxed(AnisoDomain(Domain2D::superellipse(a, b, m)?)), "out"))
}

/// Counter-clockwise polygon from `n` interleaved `x, y` pairs.
///
/// # Safety
/// `xy` must point to `2 n` doubles; `out` must be valid for writing a handle pointer.
#[no_mangle]
pub unsafe extern "C" fn aniso_domain_new_polygon(xy: *const f64, n: usize, out: *mut *mut AnisoDomain) -> AnisoStatus {
    guard(|| {
        let xy = slice(xy, 2 * n, "xy")?;
        let vertices = xy.chunks_exact(2).map(|c| [c[0], c[1]]).collect();
        write_out(out, boxed(AnisoDomain(Domain2D::polygon(vertices)?)), "out")
    })
}

/// # Safety
/// `dom` must be null or a handle from `aniso_domain_new_*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn aniso_domain_free(dom: *mut AnisoDomain) {
    free(dom)
}

/// # Safety
/// `out` must point to 1 writable double.
#[no_mangle]
pub unsafe extern "C" fn aniso_domain_area(dom: *const AnisoDomain, out: *mut f64) -> AnisoStatus {
    guard(|| write_out(out, handle(dom, "dom")?.0.area(), "out"))
}

fn spec_for(op: &AnisoOperator, dom: &AnisoDomain, source: f64) -> Result<ProblemSpec, Error> {
    ProblemSpec::new(op.0.unregularized(), dom.0.clone(), Source::Constant(source), BoundaryCondition::Dirichlet)
}

/// Dirichlet problem `-div A(grad u) = source` solved by epsilon-continuation on a mesh of size `h`.
///
/// # Safety
/// `op` and `dom` must be live handles; `out` must be valid for writing a handle pointer.
#[no_mangle]
pub unsafe extern "C" fn aniso_solve(
    op: *const AnisoOperator,
    dom: *const AnisoDomain,
    source: f64,
    h: f64,
    out: *mut *mut AnisoSolution,
) -> AnisoStatus {
    guard(|| {
        let spec = spec_for(handle(op, "op")?, handle(dom, "dom")?, source)?;
        let mesh = generate_mesh(&spec.domain, h)?;
        let report = solve_continuation(&spec, &mesh)?;
        let sol = AnisoSolution {
            vertices: mesh.vertices().to_vec(),
            final_epsilon: report.final_epsilon(),
            values: report.u,
        };
        write_out(out, boxed(sol), "out")
    })
}

/// # Safety
/// `sol` must be null or a handle from `aniso_solve` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn aniso_solution_free(sol: *mut AnisoSolution) {
    free(sol)
}

/// Number of mesh vertices, or 0 for a null handle.
///
/// # Safety
/// `sol` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn aniso_solution_len(sol: *const AnisoSolution) -> usize {
    sol.as_ref().map_or(0, |s| s.values.len())
}

/// Copies interleaved vertex coordinates (`2 len` doubles) and nodal values (`len` doubles).
/// Either output may be null to skip it.
///
/// # Safety
/// Non-null outputs must have room for the sizes above, with `len = aniso_solution_len(sol)`.
#[no_mangle]
pub unsafe extern "C" fn aniso_solution_copy(sol: *const AnisoSolution, xy: *mut f64, values: *mut f64) -> AnisoStatus {
    guard(|| {
        let s = handle(sol, "sol")?;
        if !xy.is_null() {
            let flat: Vec<f64> = s.vertices.iter().flatten().copied().collect();
            write_slice(xy, &flat, "xy")?;
        }
        if !values.is_null() {
            write_slice(values, &s.values, "values")?;
        }
        Ok(())
    })
}

/// # Safety
/// `out` must point to 1 writable double.
#[no_mangle]
pub unsafe extern "C" fn aniso_solution_final_epsilon(sol: *const AnisoSolution, out: *mut f64) -> AnisoStatus {
    guard(|| write_out(out, handle(sol, "sol")?.final_epsilon, "out"))
}

/// Convex-domain estimate at mesh size `h`: writes `|V|_H1 / ||f||_L2` and the constant it is compared with.
///
/// # Safety
/// `op` and `dom` must be live handles; `ratio` and `bound` must each point to 1 writable double.
#[no_mangle]
pub unsafe extern "C" fn aniso_verify_convex(
    op: *const AnisoOperator,
    dom: *const AnisoDomain,
    source: f64,
    h: f64,
    ratio: *mut f64,
    bound: *mut f64,
) -> AnisoStatus {
    guard(|| {
        let spec = spec_for(handle(op, "op")?, handle(dom, "dom")?, source)?;
        let est = verify_convex_estimate(&spec, &[h])?;
        write_out(ratio, est.ratio2, "ratio")?;
        write_out(bound, est.c2_bound, "bound")
    })
}
