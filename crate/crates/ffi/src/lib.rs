//! C ABI over the `shortpulse` engines.
//!
//! Every fallible call returns an [`SpStatus`]; on failure the message is kept per thread and
//! read back with [`sp_last_error_message`]. Handles are opaque and owned by the caller, who
//! releases them with the matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use shortpulse::phase_plane::{self, EquilibriumType, OrbitTrace, WaveClass};
use shortpulse::series::{self, Convention, SeriesSolution, DEFAULT_SEARCH_INTERVAL};
use shortpulse::spe::{PhasePoint, SpeParams};
use shortpulse::variational;
use shortpulse::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Parameters outside the domain of the requested computation (no saddle, singular line, ...).
    Domain = 3,
    NoConvergentRoot = 4,
    NotConverged = 5,
    OutOfRange = 6,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SpParams {
    pub c: f64,
    pub beta: f64,
    pub gamma: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpEquilibrium {
    Saddle = 0,
    Center = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpWaveClass {
    BreakingKinkPair = 0,
    SmoothHomoclinicCandidate = 1,
    ClosedOrbits = 2,
    PeriodicCuspWaves = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpConvention {
    Printed = 0,
    Consistent = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SpClassification {
    pub equilibrium: SpEquilibrium,
    pub wave_class: SpWaveClass,
    pub n_lines: u32,
    pub lines: [f64; 2],
    pub n_singular_equilibria: u32,
    /// `(u, y)` pairs; only the first `n_singular_equilibria` are meaningful.
    pub singular_equilibria: [[f64; 2]; 4],
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SpSoliton {
    pub amplitude: f64,
    pub width: f64,
    pub action: f64,
    pub gradient_norm: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SpEmbedded {
    pub nontrivial_found: bool,
    pub n_roots: u32,
    /// NaN when no degenerate branch was computed.
    pub degenerate_rho_sq_over_c: f64,
    pub degenerate_amplitude_sq_over_c: f64,
    pub degenerate_third_residual: f64,
    pub min_scaled_residual: f64,
}

/// Opaque truncated series solution.
pub struct SpSeries(SeriesSolution);

/// Opaque orbit with slow-time samples.
pub struct SpOrbit(OrbitTrace);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn status_of(e: &Error) -> SpStatus {
    match e {
        Error::NonFinite { .. } | Error::InvalidArgument(_) => SpStatus::InvalidArgument,
        Error::NoConvergentRoot(_) => SpStatus::NoConvergentRoot,
        Error::NotConverged { .. }
        | Error::SingularStep
        | Error::Quadrature { .. }
        | Error::TrivialSolution => SpStatus::NotConverged,
        _ => SpStatus::Domain,
    }
}

fn guard<F>(f: F) -> SpStatus
where
    F: FnOnce() -> Result<(), SpStatus>,
{
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SpStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            SpStatus::Panic
        }
    }
}

fn fail(e: Error) -> SpStatus {
    set_error(e.to_string());
    status_of(&e)
}

fn null(name: &str) -> SpStatus {
    set_error(format!("`{name}` is null"));
    SpStatus::NullPointer
}

fn params(p: *const SpParams) -> Result<SpeParams, SpStatus> {
    let p = unsafe { p.as_ref() }.ok_or_else(|| null("params"))?;
    SpeParams::new(p.c, p.beta, p.gamma).map_err(fail)
}

fn out<'a, T>(ptr: *mut T, name: &str) -> Result<&'a mut T, SpStatus> {
    unsafe { ptr.as_mut() }.ok_or_else(|| null(name))
}

fn convention(c: u32) -> Result<Convention, SpStatus> {
    match c {
        x if x == SpConvention::Printed as u32 => Ok(Convention::Printed),
        x if x == SpConvention::Consistent as u32 => Ok(Convention::Consistent),
        _ => {
            set_error(format!("unknown convention {c}"));
            Err(SpStatus::InvalidArgument)
        }
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (truncated, always terminated).
///
/// Returns the full message length excluding the terminator.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn sp_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let bytes = e.borrow();
        let bytes = bytes.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// # Safety
/// `params` and `result` must be null or valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sp_classify(
    params: *const SpParams,
    result: *mut SpClassification,
) -> SpStatus {
    guard(|| {
        let p = self::params(params)?;
        let result = out(result, "result")?;
        let c = phase_plane::classify(&p).map_err(fail)?;
        let mut lines = [f64::NAN; 2];
        for (slot, v) in lines.iter_mut().zip(&c.singular_lines) {
            *slot = *v;
        }
        let mut eq = [[f64::NAN; 2]; 4];
        for (slot, q) in eq.iter_mut().zip(&c.singular_equilibria) {
            *slot = [q.u, q.y];
        }
        *result = SpClassification {
            equilibrium: match c.regular_equilibrium_type {
                EquilibriumType::Saddle => SpEquilibrium::Saddle,
                EquilibriumType::Center => SpEquilibrium::Center,
            },
            wave_class: match c.wave_class {
                WaveClass::BreakingKinkPair => SpWaveClass::BreakingKinkPair,
                WaveClass::SmoothHomoclinicCandidate => SpWaveClass::SmoothHomoclinicCandidate,
                WaveClass::ClosedOrbits => SpWaveClass::ClosedOrbits,
                WaveClass::PeriodicCuspWaves => SpWaveClass::PeriodicCuspWaves,
            },
            n_lines: c.singular_lines.len().min(2) as u32,
            lines,
            n_singular_equilibria: c.singular_equilibria.len().min(4) as u32,
            singular_equilibria: eq,
        };
        Ok(())
    })
}

/// Builds the series with a prescribed leading coefficient `a1`; `convention` is an
/// [`SpConvention`] value.
///
/// # Safety
/// `params` and `series` must be null or valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sp_series_new(
    params: *const SpParams,
    a1: f64,
    order: u32,
    convention: u32,
    series: *mut *mut SpSeries,
) -> SpStatus {
    guard(|| {
        let p = self::params(params)?;
        let slot = out(series, "series")?;
        let s = SeriesSolution::new(a1, order as usize, &p, self::convention(convention)?)
            .map_err(fail)?;
        *slot = Box::into_raw(Box::new(SpSeries(s)));
        Ok(())
    })
}

/// Finds the continuity roots in the default search interval and builds the series from the
/// convergent one; fails with `NoConvergentRoot` otherwise.
///
/// # Safety
/// `params` and `series` must be null or valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sp_series_select(
    params: *const SpParams,
    order: u32,
    convention: u32,
    series: *mut *mut SpSeries,
) -> SpStatus {
    guard(|| {
        let p = self::params(params)?;
        let slot = out(series, "series")?;
        let conv = self::convention(convention)?;
        let order = order as usize;
        let roots =
            series::continuity_roots(order, &p, DEFAULT_SEARCH_INTERVAL, conv).map_err(fail)?;
        let a1 = series::select_convergent_root(&roots, order, &p, conv).map_err(fail)?;
        let s = SeriesSolution::new(a1, order, &p, conv).map_err(fail)?;
        *slot = Box::into_raw(Box::new(SpSeries(s)));
        Ok(())
    })
}

/// # Safety
/// `series` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sp_series_free(series: *mut SpSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// Leading coefficient, NaN for a null handle.
///
/// # Safety
/// `series` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sp_series_a1(series: *const SpSeries) -> f64 {
    series.as_ref().map_or(f64::NAN, |s| s.0.a1)
}

/// # Safety
/// `series` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sp_series_order(series: *const SpSeries) -> u32 {
    series.as_ref().map_or(0, |s| s.0.order as u32)
}

/// Coefficient `a_k` for `1 ≤ k ≤ order`.
///
/// # Safety
/// `series` and `value` must be null or valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sp_series_coefficient(
    series: *const SpSeries,
    k: u32,
    value: *mut f64,
) -> SpStatus {
    guard(|| {
        let s = series.as_ref().ok_or_else(|| null("series"))?;
        let value = out(value, "value")?;
        if k == 0 || k as usize > s.0.order {
            set_error(format!("k = {k} outside 1..={}", s.0.order));
            return Err(SpStatus::OutOfRange);
        }
        *value = s.0.coefficient(k as usize);
        Ok(())
    })
}

/// `u(z)`, with the odd extension for `z < 0`.
///
/// # Safety
/// `series` and `value` must be null or valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sp_series_eval(
    series: *const SpSeries,
    z: f64,
    value: *mut f64,
) -> SpStatus {
    guard(|| {
        let s = series.as_ref().ok_or_else(|| null("series"))?;
        let value = out(value, "value")?;
        if !z.is_finite() {
            set_error("z must be finite");
            return Err(SpStatus::InvalidArgument);
        }
        *value = s.0.evaluate(z);
        Ok(())
    })
}

/// Integrates the regularized system from `(u0, y0)` and attaches slow time.
///
/// # Safety
/// `params` and `orbit` must be null or valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sp_orbit_integrate(
    params: *const SpParams,
    u0: f64,
    y0: f64,
    xi_end: f64,
    step: f64,
    orbit: *mut *mut SpOrbit,
) -> SpStatus {
    guard(|| {
        let p = self::params(params)?;
        let slot = out(orbit, "orbit")?;
        let start = PhasePoint::new(u0, y0).map_err(fail)?;
        let trace = phase_plane::integrate_orbit(&p, start, xi_end, step).map_err(fail)?;
        let trace = phase_plane::slow_time_reparametrize(&trace, &p).map_err(fail)?;
        *slot = Box::into_raw(Box::new(SpOrbit(trace)));
        Ok(())
    })
}

/// # Safety
/// `orbit` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sp_orbit_free(orbit: *mut SpOrbit) {
    if !orbit.is_null() {
        drop(Box::from_raw(orbit));
    }
}

/// # Safety
/// `orbit` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sp_orbit_len(orbit: *const SpOrbit) -> usize {
    orbit.as_ref().map_or(0, |o| o.0.len())
}

/// Sample `i` as `(xi, u, y, z)`.
///
/// # Safety
/// `orbit` must be null or a live handle; `sample` must be null or valid for four doubles.
#[no_mangle]
pub unsafe extern "C" fn sp_orbit_sample(
    orbit: *const SpOrbit,
    i: usize,
    sample: *mut f64,
) -> SpStatus {
    guard(|| {
        let o = orbit.as_ref().ok_or_else(|| null("orbit"))?;
        if sample.is_null() {
            return Err(null("sample"));
        }
        if i >= o.0.len() {
            set_error(format!("index {i} outside 0..{}", o.0.len()));
            return Err(SpStatus::OutOfRange);
        }
        let z = o.0.z.as_ref().map_or(f64::NAN, |z| z[i]);
        let pt = o.0.points[i];
        std::ptr::copy_nonoverlapping([o.0.xi[i], pt.u, pt.y, z].as_ptr(), sample, 4);
        Ok(())
    })
}

/// Breaking point `z̃`, or NaN when the orbit does not break.
///
/// # Safety
/// `orbit` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sp_orbit_breaking_point(orbit: *const SpOrbit) -> f64 {
    orbit
        .as_ref()
        .and_then(|o| o.0.breaking_point)
        .unwrap_or(f64::NAN)
}

/// Gaussian-ansatz soliton of the base equation at speed `c > 0`, from the default guess.
///
/// # Safety
/// `result` must be null or a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sp_soliton_solve(c: f64, result: *mut SpSoliton) -> SpStatus {
    guard(|| {
        let result = out(result, "result")?;
        let s =
            variational::solve_regular_soliton(c, variational::default_guess(c)).map_err(fail)?;
        *result = SpSoliton {
            amplitude: s.amplitude,
            width: s.width,
            action: s.action,
            gradient_norm: s.gradient_norm,
        };
        Ok(())
    })
}

/// Multi-start search for simultaneous roots of the embedded-soliton system.
///
/// # Safety
/// `result` must be null or a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sp_embedded_solve(
    c: f64,
    starts: u32,
    result: *mut SpEmbedded,
) -> SpStatus {
    guard(|| {
        let result = out(result, "result")?;
        let r = variational::solve_embedded(c, starts as usize).map_err(fail)?;
        *result = SpEmbedded {
            nontrivial_found: r.nontrivial_found,
            n_roots: r.roots.len() as u32,
            degenerate_rho_sq_over_c: r.degenerate_rho_sq_over_c.unwrap_or(f64::NAN),
            degenerate_amplitude_sq_over_c: r.degenerate_amplitude_sq_over_c.unwrap_or(f64::NAN),
            degenerate_third_residual: r.degenerate_third_residual.unwrap_or(f64::NAN),
            min_scaled_residual: r.min_scaled_residual,
        };
        Ok(())
    })
}
