//! C interface to `entroinv`.
//!
//! Objects are opaque handles created by `*_new` / `entroinv_solve` and
//! released with the matching `*_free`. Every call returns an
//! [`EntroinvStatus`]; on failure a message is available from
//! [`entroinv_last_error_message`] on the same thread. Arrays are passed as a
//! pointer plus a length; matrices are row-major.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use entroinv::entropy::{bregman, chi, entropy_psi, log_partition, phi};
use entroinv::geometry::dist_g;
use entroinv::solver::sensitivity_xi;
use entroinv::{solve, BoxDomain, DualSolution, Error, InverseProblem, SolveStatus, TauPoint};
use nalgebra::{DMatrix, DVector};

/// Result codes. Values 2 to 4 match the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntroinvStatus {
    Ok = 0,
    InvalidArgument = 1,
    InfeasibleDatum = 2,
    RankDeficient = 3,
    IterationLimit = 4,
    DomainViolation = 5,
    NullPointer = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// Box `[a_1, b_1] x ... x [a_N, b_N]`.
pub struct EntroinvBox {
    inner: BoxDomain,
}

/// Matrix, datum and box of one inverse problem.
pub struct EntroinvProblem {
    inner: InverseProblem,
}

/// Output of [`entroinv_solve`].
pub struct EntroinvSolution {
    inner: DualSolution,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(EntroinvStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::InfeasibleDatum(_) => EntroinvStatus::InfeasibleDatum,
            Error::RankDeficient { .. } => EntroinvStatus::RankDeficient,
            Error::NotConverged(_) => EntroinvStatus::IterationLimit,
            Error::DomainViolation { .. } | Error::TangentOutOfRange { .. } => EntroinvStatus::DomainViolation,
            _ => EntroinvStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<EntroinvStatus, Failure>) -> EntroinvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => status,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            EntroinvStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(EntroinvStatus::NullPointer, format!("{what} is null"))
}

unsafe fn input<'a>(ptr: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn output(ptr: *mut f64, len: usize, values: &[f64], what: &str) -> Result<(), Failure> {
    if len < values.len() {
        return Err(Failure(
            EntroinvStatus::BufferTooSmall,
            format!("{what} needs {} entries, buffer holds {len}", values.len()),
        ));
    }
    if values.is_empty() {
        return Ok(());
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), ptr, values.len());
    Ok(())
}

unsafe fn scalar_out(ptr: *mut f64, value: f64, what: &str) -> Result<(), Failure> {
    if ptr.is_null() {
        return Err(null(what));
    }
    *ptr = value;
    Ok(())
}

unsafe fn handle<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, Failure> {
    ptr.as_ref().ok_or_else(|| null(what))
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn entroinv_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn entroinv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a box from `n` lower and `n` upper bounds.
///
/// # Safety
/// `lower` and `upper` must point to `n` readable doubles; `out` must be a
/// valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn entroinv_box_new(
    lower: *const f64,
    upper: *const f64,
    n: usize,
    out: *mut *mut EntroinvBox,
) -> EntroinvStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = BoxDomain::new(input(lower, n, "lower")?.to_vec(), input(upper, n, "upper")?.to_vec())?;
        *out = Box::into_raw(Box::new(EntroinvBox { inner }));
        Ok(EntroinvStatus::Ok)
    })
}

/// # Safety
/// `domain` must be null or a handle from [`entroinv_box_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn entroinv_box_free(domain: *mut EntroinvBox) {
    if !domain.is_null() {
        drop(Box::from_raw(domain));
    }
}

/// Number of coordinates of a box (0 for a null handle).
///
/// # Safety
/// `domain` must be null or a live box handle.
#[no_mangle]
pub unsafe extern "C" fn entroinv_box_dim(domain: *const EntroinvBox) -> usize {
    domain.as_ref().map_or(0, |d| d.inner.dim())
}

/// `M(tau) = sum_j ln(e^{a_j tau_j} + e^{b_j tau_j})`.
///
/// # Safety
/// `domain` must be a live box handle, `tau` must point to `n` doubles and
/// `out` to one writable double.
#[no_mangle]
pub unsafe extern "C" fn entroinv_log_partition(
    domain: *const EntroinvBox,
    tau: *const f64,
    n: usize,
    out: *mut f64,
) -> EntroinvStatus {
    guard(|| {
        let d = &handle(domain, "box")?.inner;
        let tau = TauPoint::from_slice(input(tau, n, "tau")?)?;
        scalar_out(out, log_partition(&tau, d)?, "out")?;
        Ok(EntroinvStatus::Ok)
    })
}

/// Entropy of an interior point.
///
/// # Safety
/// As for [`entroinv_log_partition`].
#[no_mangle]
pub unsafe extern "C" fn entroinv_entropy(
    domain: *const EntroinvBox,
    xi: *const f64,
    n: usize,
    out: *mut f64,
) -> EntroinvStatus {
    guard(|| {
        let d = &handle(domain, "box")?.inner;
        let xi = d.interior(input(xi, n, "xi")?)?;
        scalar_out(out, entropy_psi(&xi, d)?, "out")?;
        Ok(EntroinvStatus::Ok)
    })
}

/// `xi = phi(tau)`, the gradient of the log-partition.
///
/// # Safety
/// `tau` must point to `n` doubles and `out` to `out_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn entroinv_phi(
    domain: *const EntroinvBox,
    tau: *const f64,
    n: usize,
    out: *mut f64,
    out_len: usize,
) -> EntroinvStatus {
    guard(|| {
        let d = &handle(domain, "box")?.inner;
        let xi = phi(&TauPoint::from_slice(input(tau, n, "tau")?)?, d)?;
        output(out, out_len, xi.as_slice(), "out")?;
        Ok(EntroinvStatus::Ok)
    })
}

/// `tau = chi(xi)`, the inverse of [`entroinv_phi`].
///
/// # Safety
/// `xi` must point to `n` doubles and `out` to `out_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn entroinv_chi(
    domain: *const EntroinvBox,
    xi: *const f64,
    n: usize,
    out: *mut f64,
    out_len: usize,
) -> EntroinvStatus {
    guard(|| {
        let d = &handle(domain, "box")?.inner;
        let tau = chi(&d.interior(input(xi, n, "xi")?)?, d)?;
        output(out, out_len, tau.as_slice(), "out")?;
        Ok(EntroinvStatus::Ok)
    })
}

/// Bregman divergence of the entropy between two interior points.
///
/// # Safety
/// `xi` and `eta` must point to `n` doubles, `out` to one writable double.
#[no_mangle]
pub unsafe extern "C" fn entroinv_bregman(
    domain: *const EntroinvBox,
    xi: *const f64,
    eta: *const f64,
    n: usize,
    out: *mut f64,
) -> EntroinvStatus {
    guard(|| {
        let d = &handle(domain, "box")?.inner;
        let xi = d.interior(input(xi, n, "xi")?)?;
        let eta = d.interior(input(eta, n, "eta")?)?;
        scalar_out(out, bregman(&xi, &eta, d)?, "out")?;
        Ok(EntroinvStatus::Ok)
    })
}

/// Geodesic distance between two interior points in the entropy Hessian metric.
///
/// # Safety
/// As for [`entroinv_bregman`].
#[no_mangle]
pub unsafe extern "C" fn entroinv_dist_g(
    domain: *const EntroinvBox,
    xi0: *const f64,
    xi1: *const f64,
    n: usize,
    out: *mut f64,
) -> EntroinvStatus {
    guard(|| {
        let d = &handle(domain, "box")?.inner;
        let x0 = d.interior(input(xi0, n, "xi0")?)?;
        let x1 = d.interior(input(xi1, n, "xi1")?)?;
        scalar_out(out, dist_g(&x0, &x1, d)?, "out")?;
        Ok(EntroinvStatus::Ok)
    })
}

/// Creates the problem `A xi = y` over a copy of `domain`. `a` is `rows x cols`
/// row-major, `y` has `rows` entries and the box must have `cols` coordinates.
///
/// # Safety
/// Pointers must reference arrays of the stated sizes; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn entroinv_problem_new(
    a: *const f64,
    rows: usize,
    cols: usize,
    y: *const f64,
    domain: *const EntroinvBox,
    out: *mut *mut EntroinvProblem,
) -> EntroinvStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| Failure(EntroinvStatus::InvalidArgument, "matrix size overflows".into()))?;
        let a = DMatrix::from_row_slice(rows, cols, input(a, len, "a")?);
        let y = DVector::from_column_slice(input(y, rows, "y")?);
        let d = handle(domain, "box")?.inner.clone();
        let inner = InverseProblem::new(a, y, d)?;
        *out = Box::into_raw(Box::new(EntroinvProblem { inner }));
        Ok(EntroinvStatus::Ok)
    })
}

/// # Safety
/// `problem` must be null or a live problem handle.
#[no_mangle]
pub unsafe extern "C" fn entroinv_problem_free(problem: *mut EntroinvProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Solves a problem. A solution handle is written whenever the solver ran,
/// including for non-converged outcomes; the return value is `Ok` only for a
/// converged solve, otherwise the status naming the failure.
///
/// # Safety
/// `problem` must be a live problem handle and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn entroinv_solve(
    problem: *const EntroinvProblem,
    out: *mut *mut EntroinvSolution,
) -> EntroinvStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let p = &handle(problem, "problem")?.inner;
        let inner = solve(p)?;
        let status = match inner.status {
            SolveStatus::Converged => EntroinvStatus::Ok,
            SolveStatus::InfeasibleDatum => EntroinvStatus::InfeasibleDatum,
            SolveStatus::RankDeficient => EntroinvStatus::RankDeficient,
            SolveStatus::IterationLimit => EntroinvStatus::IterationLimit,
        };
        if status != EntroinvStatus::Ok {
            set_last_error(format!(
                "solver stopped with {} after {} iterations",
                inner.status.name(),
                inner.iterations
            ));
        }
        *out = Box::into_raw(Box::new(EntroinvSolution { inner }));
        Ok(status)
    })
}

/// # Safety
/// `solution` must be null or a live solution handle.
#[no_mangle]
pub unsafe extern "C" fn entroinv_solution_free(solution: *mut EntroinvSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Copies the solution point (`N` entries) into `out`.
///
/// # Safety
/// `solution` must be live and `out` must hold `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn entroinv_solution_xi(
    solution: *const EntroinvSolution,
    out: *mut f64,
    out_len: usize,
) -> EntroinvStatus {
    guard(|| {
        let s = &handle(solution, "solution")?.inner;
        output(out, out_len, s.xi_star.coords().as_slice(), "out")?;
        Ok(EntroinvStatus::Ok)
    })
}

/// Copies the multipliers (`K` entries) into `out`.
///
/// # Safety
/// As for [`entroinv_solution_xi`].
#[no_mangle]
pub unsafe extern "C" fn entroinv_solution_lambda(
    solution: *const EntroinvSolution,
    out: *mut f64,
    out_len: usize,
) -> EntroinvStatus {
    guard(|| {
        let s = &handle(solution, "solution")?.inner;
        output(out, out_len, s.lambda_star.as_slice(), "out")?;
        Ok(EntroinvStatus::Ok)
    })
}

/// Entropy at the solution, dual value, duality gap and constraint residual
/// (infinity norm). Any output pointer may be null.
///
/// # Safety
/// `solution` must be live; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn entroinv_solution_values(
    solution: *const EntroinvSolution,
    psi: *mut f64,
    dual: *mut f64,
    gap: *mut f64,
    residual_inf: *mut f64,
) -> EntroinvStatus {
    guard(|| {
        let s = &handle(solution, "solution")?.inner;
        for (ptr, v) in [(psi, s.psi_value), (dual, s.dual_value), (gap, s.gap), (residual_inf, s.residual_inf)] {
            if !ptr.is_null() {
                *ptr = v;
            }
        }
        Ok(EntroinvStatus::Ok)
    })
}

/// Newton iterations used (0 for a null handle).
///
/// # Safety
/// `solution` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn entroinv_solution_iterations(solution: *const EntroinvSolution) -> usize {
    solution.as_ref().map_or(0, |s| s.inner.iterations)
}

/// First-order change of the solution for a datum change `dy` (`K` entries),
/// written to `out` (`N` entries).
///
/// # Safety
/// Handles must be live and belong together; arrays must have the stated sizes.
#[no_mangle]
pub unsafe extern "C" fn entroinv_sensitivity_xi(
    problem: *const EntroinvProblem,
    solution: *const EntroinvSolution,
    dy: *const f64,
    k: usize,
    out: *mut f64,
    out_len: usize,
) -> EntroinvStatus {
    guard(|| {
        let p = &handle(problem, "problem")?.inner;
        let s = &handle(solution, "solution")?.inner;
        let dy = DVector::from_column_slice(input(dy, k, "dy")?);
        let dxi = sensitivity_xi(s, p, &dy)?;
        output(out, out_len, dxi.as_slice(), "out")?;
        Ok(EntroinvStatus::Ok)
    })
}
