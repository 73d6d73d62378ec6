//! C interface to `possq`.
//!
//! Objects cross the boundary as opaque handles created by `*_new`/`*_run`
//! functions and released with the matching `*_free`. Every fallible call
//! returns a [`PossqStatus`]; on failure [`possq_last_error`] describes the
//! problem until the next failing call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use possq::bench::{run_batch, BatchResult, FilterKind};
use possq::config::{Config, RawConfig};
use possq::water::water_pour_discrete;
use possq::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PossqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Output buffer length does not match the data.
    BufferSize = 3,
    /// Possibility mass below one; the water level does not exist.
    TooConcentrated = 4,
    /// Any other numerical or model failure.
    Failure = 5,
    /// A Rust panic was caught at the boundary.
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PossqFilterKind {
    Standard = 0,
    Possibility = 1,
}

fn filter_kind(raw: u32) -> Result<FilterKind, (PossqStatus, String)> {
    match raw {
        x if x == PossqFilterKind::Standard as u32 => Ok(FilterKind::Standard),
        x if x == PossqFilterKind::Possibility as u32 => Ok(FilterKind::Possibility),
        other => Err((
            PossqStatus::InvalidArgument,
            format!("unknown filter kind {other}"),
        )),
    }
}

/// Scenario and filter settings, edited key by key.
pub struct PossqScenario {
    raw: RawConfig,
    config: Config,
}

/// Reports and aggregates of a Monte Carlo batch.
pub struct PossqBatch {
    result: BatchResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("NUL bytes were replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

type Outcome = Result<(), (PossqStatus, String)>;

fn from_core(e: Error) -> (PossqStatus, String) {
    let status = match e {
        Error::TooConcentrated { .. } => PossqStatus::TooConcentrated,
        Error::InvalidParameter(_)
        | Error::DimensionMismatch { .. }
        | Error::EmptyInput
        | Error::WeightsOutOfRange { .. }
        | Error::NoUnitWeight { .. } => PossqStatus::InvalidArgument,
        _ => PossqStatus::Failure,
    };
    (status, e.to_string())
}

fn guard<F: FnOnce() -> Outcome>(f: F) -> PossqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PossqStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            PossqStatus::Panic
        }
    }
}

fn null(what: &str) -> (PossqStatus, String) {
    (PossqStatus::NullPointer, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (PossqStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        (
            PossqStatus::InvalidArgument,
            format!("{what} is not valid UTF-8"),
        )
    })
}

unsafe fn out_slice<'a>(
    p: *mut f64,
    len: usize,
    needed: usize,
    what: &str,
) -> Result<&'a mut [f64], (PossqStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    if len != needed {
        return Err((
            PossqStatus::BufferSize,
            format!("{what} holds {len} values, expected {needed}"),
        ));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

/// Message of the last failure on this thread, or null if none.
///
/// The pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn possq_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Creates a scenario with all default settings.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn possq_scenario_new(out: *mut *mut PossqScenario) -> PossqStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let handle = Box::new(PossqScenario {
            raw: RawConfig::default(),
            config: Config::default(),
        });
        *out = Box::into_raw(handle);
        Ok(())
    })
}

/// Sets one configuration key, e.g. `"scenario.scans"` to `"20"`.
///
/// Keys and units are those of the command-line config file. On failure the
/// scenario is left unchanged.
///
/// # Safety
/// `scenario` must come from [`possq_scenario_new`]; `key` and `value` must be
/// NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn possq_scenario_set(
    scenario: *mut PossqScenario,
    key: *const c_char,
    value: *const c_char,
) -> PossqStatus {
    guard(|| {
        let s = scenario.as_mut().ok_or_else(|| null("scenario"))?;
        let key = text(key, "key")?;
        let value = text(value, "value")?;
        let mut raw = s.raw.clone();
        let invalid = |e: possq::config::ConfigError| (PossqStatus::InvalidArgument, e.to_string());
        raw.set(&format!("{key}={value}")).map_err(invalid)?;
        let config = Config::from_raw(&raw).map_err(invalid)?;
        s.raw = raw;
        s.config = config;
        Ok(())
    })
}

/// Number of scans in the scenario, or 0 for a null handle.
///
/// # Safety
/// `scenario` must be null or come from [`possq_scenario_new`].
#[no_mangle]
pub unsafe extern "C" fn possq_scenario_scans(scenario: *const PossqScenario) -> usize {
    scenario.as_ref().map_or(0, |s| s.config.scenario.scans)
}

/// # Safety
/// `scenario` must be null or come from [`possq_scenario_new`], and not be
/// used afterwards.
#[no_mangle]
pub unsafe extern "C" fn possq_scenario_free(scenario: *mut PossqScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Runs `runs` engagements with seeds `base_seed + i`. `filter` is a
/// [`PossqFilterKind`] value.
///
/// # Safety
/// `scenario` must come from [`possq_scenario_new`]; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn possq_run_batch(
    scenario: *const PossqScenario,
    filter: u32,
    particles: usize,
    runs: usize,
    base_seed: u64,
    parallelism: usize,
    out: *mut *mut PossqBatch,
) -> PossqStatus {
    guard(|| {
        let s = scenario.as_ref().ok_or_else(|| null("scenario"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        if particles == 0 {
            return Err((
                PossqStatus::InvalidArgument,
                "particles must be at least 1".into(),
            ));
        }
        let sc = s
            .config
            .scenario()
            .map_err(|e| (PossqStatus::InvalidArgument, e.to_string()))?;
        let filter = filter_kind(filter)?;
        let result =
            run_batch(&sc, filter, particles, runs, base_seed, parallelism).map_err(from_core)?;
        *out = Box::into_raw(Box::new(PossqBatch { result }));
        Ok(())
    })
}

/// # Safety
/// `batch` must be null or come from [`possq_run_batch`].
#[no_mangle]
pub unsafe extern "C" fn possq_batch_runs(batch: *const PossqBatch) -> usize {
    batch.as_ref().map_or(0, |b| b.result.aggregate.runs)
}

/// # Safety
/// `batch` must be null or come from [`possq_run_batch`].
#[no_mangle]
pub unsafe extern "C" fn possq_batch_scans(batch: *const PossqBatch) -> usize {
    batch.as_ref().map_or(0, |b| b.result.aggregate.rms.len())
}

/// Number of divergent runs.
///
/// # Safety
/// `batch` must be null or come from [`possq_run_batch`].
#[no_mangle]
pub unsafe extern "C" fn possq_batch_divergent(batch: *const PossqBatch) -> usize {
    batch.as_ref().map_or(0, |b| b.result.aggregate.divergent)
}

/// Per-scan RMS position error over non-divergent runs (m); NaN when every
/// run diverged. `len` must equal [`possq_batch_scans`].
///
/// # Safety
/// `batch` must come from [`possq_run_batch`]; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn possq_batch_rms(
    batch: *const PossqBatch,
    out: *mut f64,
    len: usize,
) -> PossqStatus {
    guard(|| {
        let b = batch.as_ref().ok_or_else(|| null("batch"))?;
        let rms = &b.result.aggregate.rms;
        out_slice(out, len, rms.len(), "out")?.copy_from_slice(rms);
        Ok(())
    })
}

/// Final-scan position error of every run (m), in run order. `len` must
/// equal [`possq_batch_runs`].
///
/// # Safety
/// `batch` must come from [`possq_run_batch`]; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn possq_batch_final_errors(
    batch: *const PossqBatch,
    out: *mut f64,
    len: usize,
) -> PossqStatus {
    guard(|| {
        let b = batch.as_ref().ok_or_else(|| null("batch"))?;
        let reports = &b.result.reports;
        let dst = out_slice(out, len, reports.len(), "out")?;
        for (d, r) in dst.iter_mut().zip(reports) {
            *d = r.final_error();
        }
        Ok(())
    })
}

/// # Safety
/// `batch` must be null or come from [`possq_run_batch`], and not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn possq_batch_free(batch: *mut PossqBatch) {
    if !batch.is_null() {
        drop(Box::from_raw(batch));
    }
}

/// Cramér–Rao position bound per scan along the noise-free track (m).
/// `len` must equal [`possq_scenario_scans`].
///
/// # Safety
/// `scenario` must come from [`possq_scenario_new`]; `out` must hold `len`
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn possq_crlb(
    scenario: *const PossqScenario,
    out: *mut f64,
    len: usize,
) -> PossqStatus {
    guard(|| {
        let s = scenario.as_ref().ok_or_else(|| null("scenario"))?;
        let sc = s
            .config
            .scenario()
            .map_err(|e| (PossqStatus::InvalidArgument, e.to_string()))?;
        let bounds = possq::cli::crlb_bounds(&sc).map_err(from_core)?;
        out_slice(out, len, bounds.len(), "out")?.copy_from_slice(&bounds);
        Ok(())
    })
}

/// Water pouring of `n` discrete possibility values (maximum exactly one).
/// Writes the probability masses to `pmf` (length `n`) and the water level
/// to `level`.
///
/// # Safety
/// `weights` and `pmf` must hold `n` doubles; `level` must be writable.
#[no_mangle]
pub unsafe extern "C" fn possq_water_pour_discrete(
    weights: *const f64,
    n: usize,
    pmf: *mut f64,
    level: *mut f64,
) -> PossqStatus {
    guard(|| {
        if weights.is_null() {
            return Err(null("weights"));
        }
        if level.is_null() {
            return Err(null("level"));
        }
        let w = if n == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(weights, n)
        };
        let pour = water_pour_discrete(w).map_err(from_core)?;
        out_slice(pmf, n, n, "pmf")?.copy_from_slice(pour.pmf());
        *level = pour.level();
        Ok(())
    })
}
