//! C ABI for the flexhawkes library.
//!
//! Conventions:
//! * Opaque handles (`fh_series_t`, `fh_fit_t`) own their data; every
//!   `*_new`/constructor has a matching `*_free`, and strings returned as
//!   `char*` are released with [`fh_string_free`].
//! * Functions return an [`FhStatus`] code; on any non-OK status a
//!   thread-local message is readable via [`fh_last_error`] until the next
//!   failing call on the same thread.
//! * Output buffers use the query-then-fill pattern: the required length is
//!   always written to `written`, and data is copied only when the provided
//!   capacity suffices.

use flexhawkes::estimate::{self, FitOptions, FitReport, GmmSpec, ResidualFamily};
use flexhawkes::multivariate::MvExcitationParams;
use flexhawkes::univariate::{self, StoppingRule};
use flexhawkes::volatility::{self, MarkMoments, MomentInterpretation};
use flexhawkes::{Error, EventSeries, ExcitationParams, ResidualDistribution};
use libc::{c_char, size_t};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::ptr;

/// Status code returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum FhStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NumericalError = 3,
    InsufficientData = 4,
    IoError = 5,
}

/// Residual distribution family selector for simulation and fitting.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum FhResidualFamily {
    Exponential = 0,
    Gamma = 1,
    TrapezoidExp = 2,
}

/// Opaque event series handle.
pub struct FhSeries {
    inner: EventSeries,
}

/// Opaque fit report handle.
pub struct FhFit {
    inner: FitReport,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let cleaned = msg.replace('\0', " ");
    LAST_ERROR.with(|e| {
        *e.borrow_mut() = CString::new(cleaned).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> FhStatus {
    match err {
        Error::InsufficientData { .. } => FhStatus::InsufficientData,
        Error::Io(_) | Error::Csv { .. } => FhStatus::IoError,
        Error::Numerical(_) | Error::SurvivalUnderflow { .. } => FhStatus::NumericalError,
        _ => FhStatus::InvalidArgument,
    }
}

fn fail(err: Error) -> FhStatus {
    let code = status_of(&err);
    set_error(&err.to_string());
    code
}

fn fail_msg(code: FhStatus, msg: &str) -> FhStatus {
    set_error(msg);
    code
}

/// Crate version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fh_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message for the most recent failure on this thread. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fh_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Free a string returned by this library.
///
/// # Safety
/// `s` must have been returned by a flexhawkes function and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fh_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn slice_arg<'a, T>(ptr: *const T, len: size_t) -> Option<&'a [T]> {
    if len == 0 {
        Some(&[])
    } else if ptr.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts(ptr, len))
    }
}

fn residual_from(
    family: FhResidualFamily,
    params: &[f64],
) -> Result<ResidualDistribution, Error> {
    match family {
        FhResidualFamily::Exponential => Ok(ResidualDistribution::UnitExponential),
        FhResidualFamily::Gamma => {
            if params.len() != 1 {
                return Err(Error::InvalidParameter(
                    "gamma residual takes one parameter (shape)".into(),
                ));
            }
            ResidualDistribution::gamma_with_unit_mean(params[0])
        }
        FhResidualFamily::TrapezoidExp => {
            if params.len() != 2 {
                return Err(Error::InvalidParameter(
                    "trapezoid residual takes two parameters (a, ell)".into(),
                ));
            }
            ResidualDistribution::trapezoid_exp(params[0], params[1])
        }
    }
}

fn fit_family(family: FhResidualFamily) -> ResidualFamily {
    match family {
        FhResidualFamily::Exponential => ResidualFamily::Exponential,
        FhResidualFamily::Gamma => ResidualFamily::Gamma,
        FhResidualFamily::TrapezoidExp => ResidualFamily::TrapezoidExp,
    }
}

/// Build an event series from parallel arrays. `types` and `marks` may be
/// NULL (all-zero types, no marks).
///
/// # Safety
/// `times` (and `types`/`marks` when non-NULL) must point to `len` readable
/// elements; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fh_series_new(
    times: *const f64,
    types: *const u32,
    marks: *const f64,
    len: size_t,
    out: *mut *mut FhSeries,
) -> FhStatus {
    if out.is_null() {
        return fail_msg(FhStatus::NullPointer, "out is NULL");
    }
    let Some(times) = slice_arg(times, len) else {
        return fail_msg(FhStatus::NullPointer, "times is NULL");
    };
    let types_vec = if types.is_null() {
        vec![0u32; len]
    } else {
        std::slice::from_raw_parts(types, len).to_vec()
    };
    let marks_vec = if marks.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts(marks, len).to_vec())
    };
    match EventSeries::new(times.to_vec(), types_vec, marks_vec) {
        Ok(series) => {
            *out = Box::into_raw(Box::new(FhSeries { inner: series }));
            FhStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// # Safety
/// `series` must be a live handle from this library (or NULL).
#[no_mangle]
pub unsafe extern "C" fn fh_series_free(series: *mut FhSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// # Safety
/// `series` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fh_series_len(series: *const FhSeries) -> size_t {
    if series.is_null() {
        return 0;
    }
    (*series).inner.len()
}

/// Copy event data into caller buffers; any destination may be NULL to skip
/// that column. Buffers must hold `fh_series_len` elements.
///
/// # Safety
/// Non-NULL destinations must point to at least `fh_series_len(series)`
/// writable elements.
#[no_mangle]
pub unsafe extern "C" fn fh_series_copy(
    series: *const FhSeries,
    times_out: *mut f64,
    types_out: *mut u32,
    marks_out: *mut f64,
) -> FhStatus {
    if series.is_null() {
        return fail_msg(FhStatus::NullPointer, "series is NULL");
    }
    let s = &(*series).inner;
    if !times_out.is_null() {
        ptr::copy_nonoverlapping(s.times().as_ptr(), times_out, s.len());
    }
    if !types_out.is_null() {
        ptr::copy_nonoverlapping(s.types().as_ptr(), types_out, s.len());
    }
    if !marks_out.is_null() {
        match s.marks() {
            Some(m) => ptr::copy_nonoverlapping(m.as_ptr(), marks_out, s.len()),
            None => return fail_msg(FhStatus::InvalidArgument, "series has no marks"),
        }
    }
    FhStatus::Ok
}

/// Read a `time,type,mark` CSV into a new series handle.
///
/// # Safety
/// `path` must be a NUL-terminated string, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fh_series_read_csv(
    path: *const c_char,
    out: *mut *mut FhSeries,
) -> FhStatus {
    if path.is_null() || out.is_null() {
        return fail_msg(FhStatus::NullPointer, "path or out is NULL");
    }
    let Ok(path) = CStr::from_ptr(path).to_str() else {
        return fail_msg(FhStatus::InvalidArgument, "path is not valid UTF-8");
    };
    match EventSeries::read_csv(path) {
        Ok(series) => {
            *out = Box::into_raw(Box::new(FhSeries { inner: series }));
            FhStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Write the series as `time,type,mark` CSV.
///
/// # Safety
/// `series` must be a live handle, `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn fh_series_write_csv(
    series: *const FhSeries,
    path: *const c_char,
) -> FhStatus {
    if series.is_null() || path.is_null() {
        return fail_msg(FhStatus::NullPointer, "series or path is NULL");
    }
    let Ok(path) = CStr::from_ptr(path).to_str() else {
        return fail_msg(FhStatus::InvalidArgument, "path is not valid UTF-8");
    };
    match (*series).inner.write_csv(path) {
        Ok(()) => FhStatus::Ok,
        Err(e) => fail(e),
    }
}

/// Simulate `n_events` events of the univariate process. Pass NaN as
/// `lambda0` to start at the baseline `mu`.
///
/// # Safety
/// `family_params` must point to `n_family_params` readable doubles (may be
/// NULL when the count is zero); `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fh_simulate(
    mu: f64,
    alpha: f64,
    beta: f64,
    family: FhResidualFamily,
    family_params: *const f64,
    n_family_params: size_t,
    lambda0: f64,
    n_events: size_t,
    seed: u64,
    out: *mut *mut FhSeries,
) -> FhStatus {
    if out.is_null() {
        return fail_msg(FhStatus::NullPointer, "out is NULL");
    }
    let Some(fp) = slice_arg(family_params, n_family_params) else {
        return fail_msg(FhStatus::NullPointer, "family_params is NULL");
    };
    let result = (|| {
        let params = ExcitationParams::new(mu, alpha, beta)?;
        let dist = residual_from(family, fp)?;
        let l0 = if lambda0.is_nan() { mu } else { lambda0 };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        univariate::simulate(&params, &dist, l0, StoppingRule::Events(n_events), &mut rng)
    })();
    match result {
        Ok((series, _)) => {
            *out = Box::into_raw(Box::new(FhSeries { inner: series }));
            FhStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Infer residuals at the given parameters. The required length (one per
/// event) is always written to `written`; data is copied when `cap`
/// suffices. Pass NaN as `lambda0` for the default `mu`.
///
/// # Safety
/// `series` must be live; `out` must hold `cap` writable doubles when
/// non-NULL; `written` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fh_infer_residuals(
    series: *const FhSeries,
    mu: f64,
    alpha: f64,
    beta: f64,
    lambda0: f64,
    out: *mut f64,
    cap: size_t,
    written: *mut size_t,
) -> FhStatus {
    if series.is_null() || written.is_null() {
        return fail_msg(FhStatus::NullPointer, "series or written is NULL");
    }
    let result = (|| {
        let params = ExcitationParams::new(mu, alpha, beta)?;
        let l0 = if lambda0.is_nan() { mu } else { lambda0 };
        univariate::infer_residuals(&(*series).inner, &params, l0)
    })();
    match result {
        Ok((res, _)) => {
            *written = res.len();
            if !out.is_null() && cap >= res.len() {
                ptr::copy_nonoverlapping(res.as_ptr(), out, res.len());
            }
            FhStatus::Ok
        }
        Err(e) => fail(e),
    }
}

fn run_fit(
    series: *const FhSeries,
    out: *mut *mut FhFit,
    f: impl FnOnce(&EventSeries) -> Result<FitReport, Error>,
) -> FhStatus {
    if series.is_null() || out.is_null() {
        return fail_msg(FhStatus::NullPointer, "series or out is NULL");
    }
    match f(unsafe { &(*series).inner }) {
        Ok(report) => {
            unsafe { *out = Box::into_raw(Box::new(FhFit { inner: report })) };
            FhStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Joint maximum-likelihood fit of the univariate model.
///
/// # Safety
/// `series` must be live, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn fh_mle_fit(
    series: *const FhSeries,
    family: FhResidualFamily,
    out: *mut *mut FhFit,
) -> FhStatus {
    run_fit(series, out, |s| {
        estimate::mle_fit(s, fit_family(family), &FitOptions::default())
    })
}

/// Exponential quasi-MLE (standard Hawkes likelihood).
///
/// # Safety
/// `series` must be live, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn fh_qmle_fit(series: *const FhSeries, out: *mut *mut FhFit) -> FhStatus {
    run_fit(series, out, |s| estimate::qmle_exp_fit(s, &FitOptions::default()))
}

/// Two-step GMM fit of the excitation parameters.
///
/// # Safety
/// `series` must be live, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn fh_gmm_fit(series: *const FhSeries, out: *mut *mut FhFit) -> FhStatus {
    run_fit(series, out, |s| {
        estimate::gmm_fit(s, &GmmSpec::default(), &FitOptions::default())
    })
}

/// # Safety
/// `fit` must be a live handle from this library (or NULL).
#[no_mangle]
pub unsafe extern "C" fn fh_fit_free(fit: *mut FhFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

/// Look up a named estimate (`"mu"`, `"alpha"`, `"beta"`, `"shape"`, ...).
///
/// # Safety
/// `fit` must be live; `name` NUL-terminated; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn fh_fit_estimate(
    fit: *const FhFit,
    name: *const c_char,
    out: *mut f64,
) -> FhStatus {
    lookup(fit, name, out, |r| &r.estimates)
}

/// Look up a named standard error.
///
/// # Safety
/// `fit` must be live; `name` NUL-terminated; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn fh_fit_std_error(
    fit: *const FhFit,
    name: *const c_char,
    out: *mut f64,
) -> FhStatus {
    lookup(fit, name, out, |r| &r.std_errors)
}

unsafe fn lookup(
    fit: *const FhFit,
    name: *const c_char,
    out: *mut f64,
    map: impl Fn(&FitReport) -> &std::collections::BTreeMap<String, f64>,
) -> FhStatus {
    if fit.is_null() || name.is_null() || out.is_null() {
        return fail_msg(FhStatus::NullPointer, "fit, name, or out is NULL");
    }
    let Ok(name) = CStr::from_ptr(name).to_str() else {
        return fail_msg(FhStatus::InvalidArgument, "name is not valid UTF-8");
    };
    match map(&(*fit).inner).get(name) {
        Some(&v) => {
            *out = v;
            FhStatus::Ok
        }
        None => fail_msg(
            FhStatus::InvalidArgument,
            &format!("no parameter named {name}"),
        ),
    }
}

/// Objective value at the optimum (log-likelihood, or negated GMM
/// criterion).
///
/// # Safety
/// `fit` must be live.
#[no_mangle]
pub unsafe extern "C" fn fh_fit_objective(fit: *const FhFit) -> f64 {
    if fit.is_null() {
        return f64::NAN;
    }
    (*fit).inner.objective
}

/// # Safety
/// `fit` must be live.
#[no_mangle]
pub unsafe extern "C" fn fh_fit_converged(fit: *const FhFit) -> bool {
    !fit.is_null() && (*fit).inner.converged
}

/// Residuals inferred at the optimum for one event type (0 for univariate
/// fits). Query-then-fill like [`fh_infer_residuals`].
///
/// # Safety
/// `fit` must be live; `out` must hold `cap` doubles when non-NULL;
/// `written` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fh_fit_residuals(
    fit: *const FhFit,
    type_index: size_t,
    out: *mut f64,
    cap: size_t,
    written: *mut size_t,
) -> FhStatus {
    if fit.is_null() || written.is_null() {
        return fail_msg(FhStatus::NullPointer, "fit or written is NULL");
    }
    let report = &(*fit).inner;
    let Some(res) = report.residuals.get(type_index) else {
        return fail_msg(FhStatus::InvalidArgument, "type index out of range");
    };
    *written = res.len();
    if !out.is_null() && cap >= res.len() {
        ptr::copy_nonoverlapping(res.as_ptr(), out, res.len());
    }
    FhStatus::Ok
}

/// Full report as a JSON string; free with [`fh_string_free`].
///
/// # Safety
/// `fit` must be live, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn fh_fit_json(fit: *const FhFit, out: *mut *mut c_char) -> FhStatus {
    if fit.is_null() || out.is_null() {
        return fail_msg(FhStatus::NullPointer, "fit or out is NULL");
    }
    let json = (*fit).inner.to_json();
    match CString::new(json) {
        Ok(s) => {
            *out = s.into_raw();
            FhStatus::Ok
        }
        Err(_) => fail_msg(FhStatus::NumericalError, "report contains NUL"),
    }
}

/// Closed-form Hawkes volatility for the bivariate model over `horizon`.
/// `alpha` is row-major 2x2; mark moments are per-type means and second
/// moments. `centered` selects the covariance reading of the second-moment
/// equation (recommended).
///
/// # Safety
/// `mu`, `beta`, `mark_mean`, `mark_second` must each point to 2 readable
/// doubles and `alpha` to 4; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fh_hawkes_vol(
    mu: *const f64,
    alpha: *const f64,
    beta: *const f64,
    mark_mean: *const f64,
    mark_second: *const f64,
    horizon: f64,
    centered: bool,
    out: *mut f64,
) -> FhStatus {
    if mu.is_null()
        || alpha.is_null()
        || beta.is_null()
        || mark_mean.is_null()
        || mark_second.is_null()
        || out.is_null()
    {
        return fail_msg(FhStatus::NullPointer, "argument is NULL");
    }
    let mu = std::slice::from_raw_parts(mu, 2);
    let al = std::slice::from_raw_parts(alpha, 4);
    let beta = std::slice::from_raw_parts(beta, 2);
    let zm = std::slice::from_raw_parts(mark_mean, 2);
    let z2 = std::slice::from_raw_parts(mark_second, 2);
    let result = (|| {
        let params = MvExcitationParams::new(
            mu.to_vec(),
            vec![vec![al[0], al[1]], vec![al[2], al[3]]],
            beta.to_vec(),
        )?;
        let marks = MarkMoments::new([zm[0], zm[1]], [z2[0], z2[1]])?;
        let interp = if centered {
            MomentInterpretation::Centered
        } else {
            MomentInterpretation::Literal
        };
        volatility::hawkes_vol(&params, &marks, horizon, interp)
    })();
    match result {
        Ok(sol) => {
            *out = sol.hvol;
            FhStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Sparse-observation preprocessing of a price tape given as parallel
/// `times`/`prices` arrays plus the price before the first change. The
/// number of recorded events is always written to `written`; times and
/// prices are copied when `cap` suffices.
///
/// # Safety
/// `times` and `prices` must point to `len` readable doubles; non-NULL
/// outputs must hold `cap` writable doubles; `written` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fh_sparsify(
    times: *const f64,
    prices: *const f64,
    len: size_t,
    initial_price: f64,
    dt: f64,
    out_times: *mut f64,
    out_prices: *mut f64,
    cap: size_t,
    written: *mut size_t,
) -> FhStatus {
    if written.is_null() {
        return fail_msg(FhStatus::NullPointer, "written is NULL");
    }
    let (Some(times), Some(prices)) = (slice_arg(times, len), slice_arg(prices, len)) else {
        return fail_msg(FhStatus::NullPointer, "times or prices is NULL");
    };
    let result = (|| {
        let mut tape = flexhawkes::marketdata::PriceEventSeries {
            times: Vec::with_capacity(len),
            prices: Vec::with_capacity(len),
            directions: Vec::with_capacity(len),
            jumps: Vec::with_capacity(len),
        };
        let mut prev = initial_price;
        for (&t, &p) in times.iter().zip(prices) {
            if p == prev {
                return Err(Error::InvalidSeries(
                    "consecutive prices must differ".into(),
                ));
            }
            tape.times.push(t);
            tape.prices.push(p);
            tape.directions.push(if p > prev { 1 } else { -1 });
            tape.jumps.push((p - prev).abs());
            prev = p;
        }
        flexhawkes::marketdata::sparsify(&tape, dt)
    })();
    match result {
        Ok(sparse) => {
            *written = sparse.len();
            if cap >= sparse.len() {
                if !out_times.is_null() {
                    ptr::copy_nonoverlapping(sparse.times.as_ptr(), out_times, sparse.len());
                }
                if !out_prices.is_null() {
                    ptr::copy_nonoverlapping(sparse.prices.as_ptr(), out_prices, sparse.len());
                }
            }
            FhStatus::Ok
        }
        Err(e) => fail(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn version_is_nul_terminated() {
        let v = unsafe { CStr::from_ptr(fh_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }

    #[test]
    fn series_round_trip_through_handles() {
        let times = [0.5, 1.5, 2.25];
        let mut handle: *mut FhSeries = ptr::null_mut();
        let st = unsafe {
            fh_series_new(times.as_ptr(), ptr::null(), ptr::null(), 3, &mut handle)
        };
        assert!(matches!(st, FhStatus::Ok));
        assert_eq!(unsafe { fh_series_len(handle) }, 3);
        let mut out = [0.0; 3];
        let st = unsafe {
            fh_series_copy(handle, out.as_mut_ptr(), ptr::null_mut(), ptr::null_mut())
        };
        assert!(matches!(st, FhStatus::Ok));
        assert_eq!(out, times);
        unsafe { fh_series_free(handle) };
    }

    #[test]
    fn invalid_series_sets_error_message() {
        let times = [2.0, 1.0];
        let mut handle: *mut FhSeries = ptr::null_mut();
        let st = unsafe {
            fh_series_new(times.as_ptr(), ptr::null(), ptr::null(), 2, &mut handle)
        };
        assert!(matches!(st, FhStatus::InvalidArgument));
        let msg = unsafe { CStr::from_ptr(fh_last_error()) }.to_str().unwrap();
        assert!(msg.contains("increasing"), "message: {msg}");
    }

    #[test]
    fn simulate_fit_and_query_estimates() {
        let mut series: *mut FhSeries = ptr::null_mut();
        let st = unsafe {
            fh_simulate(
                0.5,
                0.4,
                1.0,
                FhResidualFamily::Exponential,
                ptr::null(),
                0,
                f64::NAN,
                800,
                12345,
                &mut series,
            )
        };
        assert!(matches!(st, FhStatus::Ok));
        assert_eq!(unsafe { fh_series_len(series) }, 800);

        let mut fit: *mut FhFit = ptr::null_mut();
        let st = unsafe { fh_qmle_fit(series, &mut fit) };
        assert!(matches!(st, FhStatus::Ok));
        assert!(unsafe { fh_fit_converged(fit) });
        let mut mu = 0.0;
        let name = CString::new("mu").unwrap();
        let st = unsafe { fh_fit_estimate(fit, name.as_ptr(), &mut mu) };
        assert!(matches!(st, FhStatus::Ok));
        assert!((mu - 0.5).abs() < 0.2, "mu = {mu}");

        let mut n = 0usize;
        let st = unsafe { fh_fit_residuals(fit, 0, ptr::null_mut(), 0, &mut n) };
        assert!(matches!(st, FhStatus::Ok));
        assert_eq!(n, 800);

        let mut json: *mut c_char = ptr::null_mut();
        let st = unsafe { fh_fit_json(fit, &mut json) };
        assert!(matches!(st, FhStatus::Ok));
        let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_string();
        assert!(text.contains("\"estimates\""));
        unsafe { fh_string_free(json) };
        unsafe { fh_fit_free(fit) };
        unsafe { fh_series_free(series) };
    }

    #[test]
    fn hawkes_vol_poisson_case() {
        let mu = [0.7, 1.3];
        let alpha = [0.0; 4];
        let beta = [1.0, 2.0];
        let ones = [1.0, 1.0];
        let mut hvol = 0.0;
        let st = unsafe {
            fh_hawkes_vol(
                mu.as_ptr(),
                alpha.as_ptr(),
                beta.as_ptr(),
                ones.as_ptr(),
                ones.as_ptr(),
                100.0,
                true,
                &mut hvol,
            )
        };
        assert!(matches!(st, FhStatus::Ok));
        assert!((hvol - 200.0_f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn sparsify_two_call_pattern() {
        let times = [0.1, 0.3, 0.4];
        let prices = [101.0, 102.0, 101.0];
        let mut n = 0usize;
        let st = unsafe {
            fh_sparsify(
                times.as_ptr(),
                prices.as_ptr(),
                3,
                100.0,
                0.5,
                ptr::null_mut(),
                ptr::null_mut(),
                0,
                &mut n,
            )
        };
        assert!(matches!(st, FhStatus::Ok));
        assert_eq!(n, 1);
        let mut t = [0.0];
        let mut p = [0.0];
        let st = unsafe {
            fh_sparsify(
                times.as_ptr(),
                prices.as_ptr(),
                3,
                100.0,
                0.5,
                t.as_mut_ptr(),
                p.as_mut_ptr(),
                1,
                &mut n,
            )
        };
        assert!(matches!(st, FhStatus::Ok));
        assert_eq!(t, [0.4]);
        assert_eq!(p, [101.0]);
    }
}
