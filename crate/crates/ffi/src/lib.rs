// Copyright 2026 TFGKP Contributors
// SPDX-License-Identifier: Apache-2.0

//! C ABI for the `tfgkp` crate.
//!
//! Every fallible function returns a [`TfgkpStatus`]; on failure the message
//! is kept per thread and can be read with [`tfgkp_last_error`]. Objects are
//! opaque handles released with their `_free` function. Units follow the
//! command line: times in ps, frequencies in GHz (carrier in THz).

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tfgkp::cli::{ghz_to_rad_ps, rad_ps_to_ghz, PeakKind, StateBasis, StateConfig};
use tfgkp::detection::{measurement_statistics, DetectorSpec};
use tfgkp::elements::InterleaverSpec;
use tfgkp::error_budget::{self, BroadeningSpec, ErfConvention};
use tfgkp::fock::{builtin, run_circuit, Circuit, RunReport};
use tfgkp::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TfgkpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidParameter = 3,
    Circuit = 4,
    NotExact = 5,
    Numerical = 6,
    Io = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TfgkpConvention {
    NormalCdf = 0,
    Standard = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TfgkpBasis {
    Frequency = 0,
    Time = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TfgkpPeak {
    Lorentzian = 0,
    Gaussian = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TfgkpDetector {
    /// `width` is the jitter FWHM in ps.
    Time = 0,
    /// `width` is the resolution FWHM in GHz.
    Frequency = 1,
    /// Ideal interleaver bank; `width` is ignored.
    OiBank = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TfgkpThresholds {
    pub e: f64,
    pub a: f64,
    pub ti_tc: f64,
    pub tc_bin_normal_cdf: f64,
    pub tc_bin_standard: f64,
    pub fc_bin: f64,
    pub finesse: f64,
}

/// Unbounded limits are reported as `INFINITY`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TfgkpRequirements {
    pub dt_c_min_ps: f64,
    pub time_bin_min_ps: f64,
    pub omega_r_max_ghz: f64,
    pub df_c_max_ghz: f64,
    pub finesse: f64,
    pub comb_lines: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TfgkpErrorProbabilities {
    pub e_t1_closed: f64,
    pub e_t1_quad: f64,
    pub e_f1_closed: f64,
    pub e_f1_folded: f64,
    pub e_t2_closed: f64,
    pub e_t2_quad: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TfgkpStateParams {
    pub basis: TfgkpBasis,
    pub index: usize,
    pub dim: usize,
    pub omega_r_ghz: f64,
    pub omega_0_thz: f64,
    pub peak: TfgkpPeak,
    pub peak_fwhm_ghz: f64,
    pub envelope_fwhm_ps: f64,
    pub direct: bool,
}

/// Opaque TFGKP state.
pub struct TfgkpState(tfgkp::states::TfgkpState);

/// Opaque circuit report.
pub struct TfgkpReport(RunReport);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> TfgkpStatus {
    match e {
        Error::InvalidParameter(_) | Error::IndexOutOfRange { .. } | Error::Strict(_) | Error::Json(_) => {
            TfgkpStatus::InvalidParameter
        }
        Error::Circuit(_) | Error::Assertion(_) => TfgkpStatus::Circuit,
        Error::NotExact(_) => TfgkpStatus::NotExact,
        Error::AxisMismatch { .. } | Error::NotNormalizable(_) | Error::Unsupported(_) | Error::NonUnitary { .. } => {
            TfgkpStatus::Numerical
        }
        Error::Io(_) | Error::Csv(_) => TfgkpStatus::Io,
    }
}

/// Runs `f`, recording any error or panic.
fn guard(f: impl FnOnce() -> Result<(), (TfgkpStatus, String)>) -> TfgkpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TfgkpStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            TfgkpStatus::Panic
        }
    }
}

type FfiResult<T> = Result<T, (TfgkpStatus, String)>;

fn lift<T>(r: tfgkp::Result<T>) -> FfiResult<T> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (TfgkpStatus, String) {
    (TfgkpStatus::NullPointer, format!("{what} is null"))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> FfiResult<&'a mut T> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (TfgkpStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn convention(c: TfgkpConvention) -> ErfConvention {
    match c {
        TfgkpConvention::NormalCdf => ErfConvention::NormalCdf,
        TfgkpConvention::Standard => ErfConvention::Standard,
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tfgkp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length without the NUL.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn tfgkp_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Threshold constants for a target error rate `e` in (0, 1).
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tfgkp_thresholds(e: f64, out: *mut TfgkpThresholds) -> TfgkpStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let r = lift(error_budget::thresholds(e))?;
        *out = TfgkpThresholds {
            e: r.e,
            a: r.a,
            ti_tc: r.bound_ratio_ti_tc,
            tc_bin_normal_cdf: r.bound_ratio_tc_bin_normal_cdf,
            tc_bin_standard: r.bound_ratio_tc_bin_standard,
            fc_bin: r.bound_ratio_fc_bin,
            finesse: r.finesse,
        };
        Ok(())
    })
}

/// Hardware limits implied by a detector jitter FWHM (ps).
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tfgkp_requirements(
    jitter_fwhm_ps: f64,
    e: f64,
    dim: usize,
    conv: TfgkpConvention,
    out: *mut TfgkpRequirements,
) -> TfgkpStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let r = lift(error_budget::hardware_requirements(jitter_fwhm_ps, e, dim, convention(conv)))?;
        *out = TfgkpRequirements {
            dt_c_min_ps: r.dt_c_min,
            time_bin_min_ps: r.time_bin_min,
            omega_r_max_ghz: r.omega_r_max_ghz().unwrap_or(f64::INFINITY),
            df_c_max_ghz: r.df_c_max_ghz().unwrap_or(f64::INFINITY),
            finesse: r.finesse,
            comb_lines: r.comb_lines.unwrap_or(f64::INFINITY),
        };
        Ok(())
    })
}

/// Closed-form and quadrature error probabilities for one set of widths.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tfgkp_error_probabilities(
    dt_i_ps: f64,
    dt_c_ps: f64,
    df_c_ghz: f64,
    omega_r_ghz: f64,
    dim: usize,
    out: *mut TfgkpErrorProbabilities,
) -> TfgkpStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let spec = lift(BroadeningSpec::new(dt_i_ps, dt_c_ps, ghz_to_rad_ps(df_c_ghz), dim, ghz_to_rad_ps(omega_r_ghz)))?;
        *out = TfgkpErrorProbabilities {
            e_t1_closed: error_budget::e_t1_closed(&spec, ErfConvention::NormalCdf),
            e_t1_quad: error_budget::e_t1_quad(&spec),
            e_f1_closed: error_budget::e_f1_closed(&spec),
            e_f1_folded: error_budget::e_f1_folded(&spec),
            e_t2_closed: lift(error_budget::e_t2_closed(&spec))?,
            e_t2_quad: lift(error_budget::e_t2_quad(&spec))?,
        };
        Ok(())
    })
}

/// Builds a basis state. Release with [`tfgkp_state_free`].
///
/// # Safety
/// `params` must be null or valid for reads, `out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tfgkp_state_new(params: *const TfgkpStateParams, out: *mut *mut TfgkpState) -> TfgkpStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let p = params.as_ref().ok_or_else(|| null("params"))?;
        let cfg = StateConfig {
            basis: match p.basis {
                TfgkpBasis::Frequency => StateBasis::Frequency,
                TfgkpBasis::Time => StateBasis::Time,
            },
            index: p.index,
            dim: p.dim,
            omega_r_ghz: p.omega_r_ghz,
            omega_0_thz: p.omega_0_thz,
            peak: match p.peak {
                TfgkpPeak::Lorentzian => PeakKind::Lorentzian,
                TfgkpPeak::Gaussian => PeakKind::Gaussian,
            },
            peak_fwhm_ghz: p.peak_fwhm_ghz,
            envelope_fwhm_ps: p.envelope_fwhm_ps,
            direct: p.direct,
        };
        let s = lift(cfg.build())?;
        *out = Box::into_raw(Box::new(TfgkpState(s)));
        Ok(())
    })
}

/// # Safety
/// `state` must be null or a handle from [`tfgkp_state_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tfgkp_state_free(state: *mut TfgkpState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Temporal period `tau_r` in ps, or NaN for a null handle.
///
/// # Safety
/// `state` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tfgkp_state_tau_r_ps(state: *const TfgkpState) -> f64 {
    state.as_ref().map_or(f64::NAN, |s| s.0.tau_r())
}

/// Line spacing `omega_r / 2 pi` in GHz, or NaN for a null handle.
///
/// # Safety
/// `state` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tfgkp_state_omega_r_ghz(state: *const TfgkpState) -> f64 {
    state.as_ref().map_or(f64::NAN, |s| rad_ps_to_ghz(s.0.omega_r()))
}

/// Samples `shots` detections and writes per-bin counts into `counts`
/// (`counts_len` must equal the state dimension). `lost` receives photons
/// redrawn after leaving an OI bank; it may be null.
///
/// # Safety
/// `state` must be a live handle, `counts` valid for `counts_len` writes and
/// `lost` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tfgkp_detect_counts(
    state: *const TfgkpState,
    detector: TfgkpDetector,
    width: f64,
    shots: usize,
    seed: u64,
    counts: *mut u64,
    counts_len: usize,
    lost: *mut u64,
) -> TfgkpStatus {
    guard(|| {
        let s = &state.as_ref().ok_or_else(|| null("state"))?.0;
        if counts.is_null() {
            return Err(null("counts"));
        }
        let d = s.d();
        if counts_len != d {
            return Err((TfgkpStatus::BufferTooSmall, format!("counts needs {d} entries, got {counts_len}")));
        }
        let spec = match detector {
            TfgkpDetector::Time => DetectorSpec::time(width),
            TfgkpDetector::Frequency => DetectorSpec::frequency(ghz_to_rad_ps(width)),
            TfgkpDetector::OiBank => DetectorSpec::oi_bank(lift(InterleaverSpec::ideal(d, s.omega_r(), s.omega_0()))?),
        };
        let h = lift(measurement_statistics(s, &spec, shots, seed))?;
        std::slice::from_raw_parts_mut(counts, counts_len).copy_from_slice(&h.counts);
        if let Some(l) = lost.as_mut() {
            *l = h.lost;
        }
        Ok(())
    })
}

/// Runs a circuit. `circuit` is either a built-in name or a JSON circuit
/// description. Release the report with [`tfgkp_report_free`].
///
/// # Safety
/// `circuit` must be null or a NUL-terminated string, `out` null or valid
/// for writes.
#[no_mangle]
pub unsafe extern "C" fn tfgkp_circuit_run(
    circuit: *const c_char,
    visibility: f64,
    exact: bool,
    out: *mut *mut TfgkpReport,
) -> TfgkpStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let text = str_arg(circuit, "circuit")?;
        let c = if text.trim_start().starts_with('{') { lift(Circuit::from_json(text))? } else { lift(builtin(text))? };
        let r = lift(run_circuit(&c, visibility, exact))?;
        *out = Box::into_raw(Box::new(TfgkpReport(r)));
        Ok(())
    })
}

/// # Safety
/// `report` must be null or a handle from [`tfgkp_circuit_run`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tfgkp_report_free(report: *mut TfgkpReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Heralded success probability, or NaN for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tfgkp_report_success_prob(report: *const TfgkpReport) -> f64 {
    report.as_ref().map_or(f64::NAN, |r| r.0.success_prob.value)
}

/// Smallest fidelity over heralded branches, NaN if there is no target.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tfgkp_report_min_fidelity(report: *const TfgkpReport) -> f64 {
    report.as_ref().and_then(|r| r.0.min_fidelity.as_ref()).map_or(f64::NAN, |n| n.value)
}

/// Whether every expectation of the circuit held. False for null.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tfgkp_report_passed(report: *const TfgkpReport) -> bool {
    report.as_ref().is_some_and(|r| r.0.passed())
}

/// Full report as JSON. Release with [`tfgkp_string_free`]; null on error.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tfgkp_report_json(report: *const TfgkpReport) -> *mut c_char {
    let Some(r) = report.as_ref() else {
        set_error("report is null");
        return ptr::null_mut();
    };
    match serde_json::to_string(&r.0).ok().and_then(|s| CString::new(s).ok()) {
        Some(c) => c.into_raw(),
        None => {
            set_error("report could not be serialized");
            ptr::null_mut()
        }
    }
}

/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tfgkp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn errors_map_to_status_codes() {
        assert_eq!(status_of(&Error::NotExact("x".into())), TfgkpStatus::NotExact);
        assert_eq!(status_of(&Error::NonUnitary { defect: 1.0 }), TfgkpStatus::Numerical);
        assert_eq!(status_of(&Error::Circuit("x".into())), TfgkpStatus::Circuit);
    }

    #[test]
    fn panics_are_caught() {
        assert_eq!(guard(|| panic!("boom")), TfgkpStatus::Panic);
        let n = unsafe { tfgkp_last_error(ptr::null_mut(), 0) };
        assert_eq!(n, "internal panic".len());
    }
}
