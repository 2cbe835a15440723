/* Copyright 2026 TFGKP Contributors */
/* SPDX-License-Identifier: Apache-2.0 */

#ifndef TFGKP_H
#define TFGKP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TfgkpStatus {
  TFGKP_STATUS_OK = 0,
  TFGKP_STATUS_NULL_POINTER = 1,
  TFGKP_STATUS_INVALID_UTF8 = 2,
  TFGKP_STATUS_INVALID_PARAMETER = 3,
  TFGKP_STATUS_CIRCUIT = 4,
  TFGKP_STATUS_NOT_EXACT = 5,
  TFGKP_STATUS_NUMERICAL = 6,
  TFGKP_STATUS_IO = 7,
  TFGKP_STATUS_BUFFER_TOO_SMALL = 8,
  TFGKP_STATUS_PANIC = 9,
} TfgkpStatus;

typedef enum TfgkpConvention {
  TFGKP_CONVENTION_NORMAL_CDF = 0,
  TFGKP_CONVENTION_STANDARD = 1,
} TfgkpConvention;

typedef enum TfgkpBasis {
  TFGKP_BASIS_FREQUENCY = 0,
  TFGKP_BASIS_TIME = 1,
} TfgkpBasis;

typedef enum TfgkpPeak {
  TFGKP_PEAK_LORENTZIAN = 0,
  TFGKP_PEAK_GAUSSIAN = 1,
} TfgkpPeak;

typedef enum TfgkpDetector {
  /**
   * `width` is the jitter FWHM in ps.
   */
  TFGKP_DETECTOR_TIME = 0,
  /**
   * `width` is the resolution FWHM in GHz.
   */
  TFGKP_DETECTOR_FREQUENCY = 1,
  /**
   * Ideal interleaver bank; `width` is ignored.
   */
  TFGKP_DETECTOR_OI_BANK = 2,
} TfgkpDetector;

/**
 * Opaque circuit report.
 */
typedef struct TfgkpReport TfgkpReport;

/**
 * Opaque TFGKP state.
 */
typedef struct TfgkpState TfgkpState;

typedef struct TfgkpThresholds {
  double e;
  double a;
  double ti_tc;
  double tc_bin_normal_cdf;
  double tc_bin_standard;
  double fc_bin;
  double finesse;
} TfgkpThresholds;

/**
 * Unbounded limits are reported as `INFINITY`.
 */
typedef struct TfgkpRequirements {
  double dt_c_min_ps;
  double time_bin_min_ps;
  double omega_r_max_ghz;
  double df_c_max_ghz;
  double finesse;
  double comb_lines;
} TfgkpRequirements;

typedef struct TfgkpErrorProbabilities {
  double e_t1_closed;
  double e_t1_quad;
  double e_f1_closed;
  double e_f1_folded;
  double e_t2_closed;
  double e_t2_quad;
} TfgkpErrorProbabilities;

typedef struct TfgkpStateParams {
  enum TfgkpBasis basis;
  size_t index;
  size_t dim;
  double omega_r_ghz;
  double omega_0_thz;
  enum TfgkpPeak peak;
  double peak_fwhm_ghz;
  double envelope_fwhm_ps;
  bool direct;
} TfgkpStateParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *tfgkp_version(void);

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length without the NUL.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t tfgkp_last_error(char *buf, size_t len);

/**
 * Threshold constants for a target error rate `e` in (0, 1).
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum TfgkpStatus tfgkp_thresholds(double e, struct TfgkpThresholds *out);

/**
 * Hardware limits implied by a detector jitter FWHM (ps).
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum TfgkpStatus tfgkp_requirements(double jitter_fwhm_ps,
                                    double e,
                                    size_t dim,
                                    enum TfgkpConvention conv,
                                    struct TfgkpRequirements *out);

/**
 * Closed-form and quadrature error probabilities for one set of widths.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum TfgkpStatus tfgkp_error_probabilities(double dt_i_ps,
                                           double dt_c_ps,
                                           double df_c_ghz,
                                           double omega_r_ghz,
                                           size_t dim,
                                           struct TfgkpErrorProbabilities *out);

/**
 * Builds a basis state. Release with [`tfgkp_state_free`].
 *
 * # Safety
 * `params` must be null or valid for reads, `out` null or valid for writes.
 */
enum TfgkpStatus tfgkp_state_new(const struct TfgkpStateParams *params, struct TfgkpState **out);

/**
 * # Safety
 * `state` must be null or a handle from [`tfgkp_state_new`] not yet freed.
 */
void tfgkp_state_free(struct TfgkpState *state);

/**
 * Temporal period `tau_r` in ps, or NaN for a null handle.
 *
 * # Safety
 * `state` must be null or a live handle.
 */
double tfgkp_state_tau_r_ps(const struct TfgkpState *state);

/**
 * Line spacing `omega_r / 2 pi` in GHz, or NaN for a null handle.
 *
 * # Safety
 * `state` must be null or a live handle.
 */
double tfgkp_state_omega_r_ghz(const struct TfgkpState *state);

/**
 * Samples `shots` detections and writes per-bin counts into `counts`
 * (`counts_len` must equal the state dimension). `lost` receives photons
 * redrawn after leaving an OI bank; it may be null.
 *
 * # Safety
 * `state` must be a live handle, `counts` valid for `counts_len` writes and
 * `lost` null or valid for writes.
 */
enum TfgkpStatus tfgkp_detect_counts(const struct TfgkpState *state,
                                     enum TfgkpDetector detector,
                                     double width,
                                     size_t shots,
                                     uint64_t seed,
                                     uint64_t *counts,
                                     size_t counts_len,
                                     uint64_t *lost);

/**
 * Runs a circuit. `circuit` is either a built-in name or a JSON circuit
 * description. Release the report with [`tfgkp_report_free`].
 *
 * # Safety
 * `circuit` must be null or a NUL-terminated string, `out` null or valid
 * for writes.
 */
enum TfgkpStatus tfgkp_circuit_run(const char *circuit,
                                   double visibility,
                                   bool exact,
                                   struct TfgkpReport **out);

/**
 * # Safety
 * `report` must be null or a handle from [`tfgkp_circuit_run`] not yet freed.
 */
void tfgkp_report_free(struct TfgkpReport *report);

/**
 * Heralded success probability, or NaN for a null handle.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
double tfgkp_report_success_prob(const struct TfgkpReport *report);

/**
 * Smallest fidelity over heralded branches, NaN if there is no target.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
double tfgkp_report_min_fidelity(const struct TfgkpReport *report);

/**
 * Whether every expectation of the circuit held. False for null.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
bool tfgkp_report_passed(const struct TfgkpReport *report);

/**
 * Full report as JSON. Release with [`tfgkp_string_free`]; null on error.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
char *tfgkp_report_json(const struct TfgkpReport *report);

/**
 * # Safety
 * `s` must be null or a string returned by this library not yet freed.
 */
void tfgkp_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TFGKP_H */
