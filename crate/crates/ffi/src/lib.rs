//! C ABI over `gbt-core`.
//!
//! Handles are opaque and owned by the caller once returned; release them
//! with the matching `*_free`. Every fallible call returns a [`GbtStatus`].
//! On failure, [`gbt_last_error`] describes the most recent error raised on
//! the calling thread. Complex arrays are interleaved `re, im` doubles.

use std::cell::RefCell;
use std::ffi::CString;
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gbt_core::bell::BellIndex;
use gbt_core::teleport::{run_teleport, ProtocolConfig, TeleportReport};
use gbt_core::verify::run_all;
use gbt_core::weyl::ObservableSpec;
use gbt_core::{CNum, GbtError, StateVec};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GbtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DegenerateObservable = 3,
    NotNormalized = 4,
    Internal = 5,
    Panic = 6,
}

/// Opaque protocol configuration.
pub struct GbtConfig {
    inner: ProtocolConfig,
}

/// Opaque result of one teleportation run.
pub struct GbtReport {
    inner: TeleportReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(err: &GbtError) -> GbtStatus {
    match err {
        GbtError::NotNormalized { .. } => GbtStatus::NotNormalized,
        GbtError::DegenerateObservable { .. } => GbtStatus::DegenerateObservable,
        GbtError::InconsistentSpectrum(_) | GbtError::NoCorrection { .. } => GbtStatus::Internal,
        _ => GbtStatus::InvalidArgument,
    }
}

struct Fail(GbtStatus, String);

impl From<GbtError> for Fail {
    fn from(e: GbtError) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(GbtStatus::NullPointer, format!("{what} is null"))
}

fn guard(body: impl FnOnce() -> Result<(), Fail>) -> GbtStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => GbtStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("panic inside gbt");
            GbtStatus::Panic
        }
    }
}

/// # Safety
/// `data` must point to `2 * len` readable doubles when `len > 0`.
unsafe fn read_complex(data: *const f64, len: usize) -> Result<Vec<CNum>, Fail> {
    if len == 0 {
        return Ok(Vec::new());
    }
    if data.is_null() {
        return Err(null("amplitude array"));
    }
    let raw = std::slice::from_raw_parts(data, 2 * len);
    Ok(raw.chunks_exact(2).map(|c| CNum::new(c[0], c[1])).collect())
}

/// # Safety
/// `data` must point to `len` readable doubles when `len > 0`.
unsafe fn read_reals(data: *const f64, len: usize) -> Result<Vec<f64>, Fail> {
    if len == 0 {
        return Ok(Vec::new());
    }
    if data.is_null() {
        return Err(null("eigenvalue array"));
    }
    Ok(std::slice::from_raw_parts(data, len).to_vec())
}

fn into_c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Fail(GbtStatus::Internal, "string contains a NUL byte".into()))
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next `gbt_*` call on the same thread.
#[no_mangle]
pub extern "C" fn gbt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Static, NUL-terminated library version.
#[no_mangle]
pub extern "C" fn gbt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a configuration. `amps` holds `n_amps` complex amplitudes and
/// `n_amps` must equal `d`. With `n_eigenvalues == 0` the observable takes
/// the descending eigenvalues `d² - 1, .., 0`; otherwise `eigenvalues`
/// lists one value per Bell state in flat order. A non-normalized input is
/// rejected unless `normalize` is set.
///
/// # Safety
/// Array arguments must be readable for their stated lengths and `out`
/// must be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn gbt_config_new(
    d: usize,
    amps: *const f64,
    n_amps: usize,
    resource_m: usize,
    resource_n: usize,
    eigenvalues: *const f64,
    n_eigenvalues: usize,
    normalize: bool,
    seed: u64,
    out: *mut *mut GbtConfig,
) -> GbtStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let mut amps = read_complex(amps, n_amps)?;
        if normalize {
            amps = StateVec::normalized(vec![amps.len()], amps)?
                .amps()
                .to_vec();
        }
        let observable = if n_eigenvalues == 0 {
            ObservableSpec::descending(d)?
        } else {
            ObservableSpec::new(d, read_reals(eigenvalues, n_eigenvalues)?)?
        };
        let resource = BellIndex::new(d, resource_m, resource_n)?;
        let inner = ProtocolConfig::new(d, amps, resource, observable, seed)?;
        *out = Box::into_raw(Box::new(GbtConfig { inner }));
        Ok(())
    })
}

/// The standard qubit (`d = 2`) or qutrit (`d = 3`) protocol.
///
/// # Safety
/// As for [`gbt_config_new`].
#[no_mangle]
pub unsafe extern "C" fn gbt_config_standard(
    d: usize,
    amps: *const f64,
    n_amps: usize,
    seed: u64,
    out: *mut *mut GbtConfig,
) -> GbtStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let amps = read_complex(amps, n_amps)?;
        let inner = match d {
            2 => ProtocolConfig::standard_d2(amps, seed)?,
            3 => ProtocolConfig::standard_d3(amps, seed)?,
            _ => return Err(GbtError::InvalidDimension(d).into()),
        };
        *out = Box::into_raw(Box::new(GbtConfig { inner }));
        Ok(())
    })
}

/// # Safety
/// `config` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn gbt_config_set_seed(config: *mut GbtConfig, seed: u64) -> GbtStatus {
    guard(|| {
        let cfg = config.as_mut().ok_or_else(|| null("config"))?;
        cfg.inner.seed = seed;
        Ok(())
    })
}

/// # Safety
/// `config` must come from this library and not be used afterwards.
/// Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn gbt_config_free(config: *mut GbtConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Runs the protocol once with the configuration's seed.
///
/// # Safety
/// `config` must come from this library and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gbt_teleport(
    config: *const GbtConfig,
    out: *mut *mut GbtReport,
) -> GbtStatus {
    guard(|| {
        let cfg = config.as_ref().ok_or_else(|| null("config"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = run_teleport(&cfg.inner)?;
        *out = Box::into_raw(Box::new(GbtReport { inner }));
        Ok(())
    })
}

/// # Safety
/// `report` must come from this library and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gbt_report_fidelity(report: *const GbtReport, out: *mut f64) -> GbtStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        *out.as_mut().ok_or_else(|| null("out"))? = r.inner.fidelity;
        Ok(())
    })
}

/// Alice's message as a flat Bell index in `1..=d²`.
///
/// # Safety
/// `report` must come from this library and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gbt_report_message(
    report: *const GbtReport,
    out: *mut usize,
) -> GbtStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        *out.as_mut().ok_or_else(|| null("out"))? = r.inner.message.bell_flat_index;
        Ok(())
    })
}

/// # Safety
/// `report` must come from this library and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gbt_report_success(report: *const GbtReport, out: *mut bool) -> GbtStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        *out.as_mut().ok_or_else(|| null("out"))? = r.inner.success;
        Ok(())
    })
}

/// Copies Bob's corrected state into `buf` as `d` interleaved complex
/// values. `capacity` counts doubles and must be at least `2 * d`.
///
/// # Safety
/// `buf` must be writable for `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn gbt_report_bob_state(
    report: *const GbtReport,
    buf: *mut f64,
    capacity: usize,
) -> GbtStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let amps = r.inner.bob_state.amps();
        if capacity < 2 * amps.len() {
            return Err(Fail(
                GbtStatus::InvalidArgument,
                format!("buffer holds {capacity} doubles, need {}", 2 * amps.len()),
            ));
        }
        let dst = std::slice::from_raw_parts_mut(buf, 2 * amps.len());
        for (c, a) in dst.chunks_exact_mut(2).zip(amps) {
            c[0] = a.re;
            c[1] = a.im;
        }
        Ok(())
    })
}

/// The full report as JSON. Release with [`gbt_string_free`].
///
/// # Safety
/// `report` must come from this library and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gbt_report_to_json(
    report: *const GbtReport,
    out: *mut *mut c_char,
) -> GbtStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let json = serde_json::to_string(&r.inner)
            .map_err(|e| Fail(GbtStatus::Internal, e.to_string()))?;
        *out = into_c_string(json)?;
        Ok(())
    })
}

/// # Safety
/// `report` must come from this library and not be used afterwards.
/// Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn gbt_report_free(report: *mut GbtReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Runs every verification suite at dimension `d`. Writes the number of
/// failed checks to `failed`. When `json` is not null it receives one JSON
/// object per check, newline separated; release it with
/// [`gbt_string_free`].
///
/// # Safety
/// `failed` must be writable; `json` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn gbt_verify_all(
    d: usize,
    seed: u64,
    failed: *mut usize,
    json: *mut *mut c_char,
) -> GbtStatus {
    guard(|| {
        let failed = failed.as_mut().ok_or_else(|| null("failed"))?;
        let checks = run_all(d, seed)?;
        *failed = checks.iter().filter(|c| !c.passed).count();
        if !json.is_null() {
            let mut text = String::new();
            for c in &checks {
                text.push_str(
                    &serde_json::to_string(c)
                        .map_err(|e| Fail(GbtStatus::Internal, e.to_string()))?,
                );
                text.push('\n');
            }
            *json = into_c_string(text)?;
        }
        Ok(())
    })
}

/// # Safety
/// `s` must be a string returned by this library, or null.
#[no_mangle]
pub unsafe extern "C" fn gbt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
