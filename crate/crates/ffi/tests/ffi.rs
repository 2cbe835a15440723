// Copyright 2026 TFGKP Contributors
// SPDX-License-Identifier: Apache-2.0

use std::ffi::{CStr, CString};
use std::ptr;

use tfgkp_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 256];
    unsafe { tfgkp_last_error(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn params(basis: TfgkpBasis, index: usize) -> TfgkpStateParams {
    TfgkpStateParams {
        basis,
        index,
        dim: 2,
        omega_r_ghz: 21.0,
        omega_0_thz: 193.4,
        peak: TfgkpPeak::Lorentzian,
        peak_fwhm_ghz: 0.1,
        envelope_fwhm_ps: 10.0,
        direct: false,
    }
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(tfgkp_version()) };
    assert_eq!(v.to_str().unwrap(), tfgkp::VERSION);
}

#[test]
fn thresholds_and_requirements() {
    let mut t = TfgkpThresholds::default();
    assert_eq!(unsafe { tfgkp_thresholds(0.01, &mut t) }, TfgkpStatus::Ok);
    assert!((t.ti_tc - 0.2015).abs() < 1e-4);
    assert!((t.finesse - 63.66).abs() < 0.01);

    let mut r = TfgkpRequirements::default();
    assert_eq!(unsafe { tfgkp_requirements(4.3, 0.01, 2, TfgkpConvention::NormalCdf, &mut r) }, TfgkpStatus::Ok);
    assert!((r.dt_c_min_ps - 21.338).abs() < 1e-3);
    assert!((r.omega_r_max_ghz - 20.999).abs() < 1e-3);
    assert_eq!(unsafe { tfgkp_requirements(0.0, 0.01, 2, TfgkpConvention::NormalCdf, &mut r) }, TfgkpStatus::Ok);
    assert!(r.omega_r_max_ghz.is_infinite());
}

#[test]
fn bad_arguments_return_codes_and_messages() {
    let mut t = TfgkpThresholds::default();
    assert_eq!(unsafe { tfgkp_thresholds(1.5, &mut t) }, TfgkpStatus::InvalidParameter);
    assert!(last_error().contains("(0, 1)"));
    assert_eq!(unsafe { tfgkp_thresholds(0.01, ptr::null_mut()) }, TfgkpStatus::NullPointer);
    assert_eq!(last_error(), "out is null");
    let mut short = [0 as std::ffi::c_char; 4];
    let n = unsafe { tfgkp_last_error(short.as_mut_ptr(), short.len()) };
    assert_eq!(n, "out is null".len());
    assert_eq!(unsafe { CStr::from_ptr(short.as_ptr()) }.to_str().unwrap(), "out");
}

#[test]
fn error_probabilities_agree_with_quadrature() {
    let mut p = TfgkpErrorProbabilities::default();
    assert_eq!(unsafe { tfgkp_error_probabilities(2.0, 10.0, 0.1, 21.0, 2, &mut p) }, TfgkpStatus::Ok);
    assert!((p.e_t1_closed - p.e_t1_quad).abs() < 1e-6);
    assert!((p.e_f1_folded - p.e_f1_closed).abs() < 0.01);
    assert!((p.e_t2_closed - p.e_t2_quad).abs() < 1e-4);
}

#[test]
fn state_handles_and_detection() {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { tfgkp_state_new(&params(TfgkpBasis::Frequency, 1), &mut s) }, TfgkpStatus::Ok);
    assert!(!s.is_null());
    assert!((unsafe { tfgkp_state_tau_r_ps(s) } - 2000.0 / 21.0).abs() < 1e-9);
    assert!((unsafe { tfgkp_state_omega_r_ghz(s) } - 21.0).abs() < 1e-9);

    let mut counts = [0u64; 2];
    let st = unsafe { tfgkp_detect_counts(s, TfgkpDetector::OiBank, 0.0, 500, 3, counts.as_mut_ptr(), 2, ptr::null_mut()) };
    assert_eq!(st, TfgkpStatus::Ok);
    // Lorentzian tails leak a few counts into the wrong port
    assert_eq!(counts.iter().sum::<u64>(), 500);
    assert!(counts[1] >= 490, "{counts:?}");
    let st = unsafe { tfgkp_detect_counts(s, TfgkpDetector::Time, 0.0, 10, 3, counts.as_mut_ptr(), 3, ptr::null_mut()) };
    assert_eq!(st, TfgkpStatus::BufferTooSmall);
    unsafe { tfgkp_state_free(s) };
    unsafe { tfgkp_state_free(ptr::null_mut()) };

    let mut bad = params(TfgkpBasis::Time, 5);
    bad.dim = 2;
    let mut s = ptr::null_mut();
    assert_ne!(unsafe { tfgkp_state_new(&bad, &mut s) }, TfgkpStatus::Ok);
    assert!(s.is_null());
}

#[test]
fn circuit_reports() {
    let name = CString::new("type_i").unwrap();
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { tfgkp_circuit_run(name.as_ptr(), 1.0, true, &mut r) }, TfgkpStatus::Ok);
    assert_eq!(unsafe { tfgkp_report_success_prob(r) }, 0.5);
    assert_eq!(unsafe { tfgkp_report_min_fidelity(r) }, 1.0);
    assert!(unsafe { tfgkp_report_passed(r) });
    let json = unsafe { tfgkp_report_json(r) };
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    unsafe { tfgkp_string_free(json) };
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["success_prob"]["exact"], "1/2");
    unsafe { tfgkp_report_free(r) };

    let name = CString::new("no_such_circuit").unwrap();
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { tfgkp_circuit_run(name.as_ptr(), 1.0, true, &mut r) }, TfgkpStatus::InvalidParameter);
    assert!(last_error().contains("no_such_circuit"));
    assert!(r.is_null());
    assert!(unsafe { tfgkp_report_success_prob(ptr::null()) }.is_nan());
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/tfgkp.h");
    let src = include_str!("../src/lib.rs");
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15);
    for f in exports {
        assert!(header.contains(&format!("{f}(")), "{f} missing from header");
    }
}

#[test]
fn header_compiles_as_c() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let Ok(status) = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", &format!("{dir}/include")])
        .arg(format!("{dir}/examples/smoke.c"))
        .status()
    else {
        eprintln!("no C compiler; skipped");
        return;
    };
    assert!(status.success());
}
