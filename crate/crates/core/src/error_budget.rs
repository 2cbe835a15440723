// Copyright 2026 TFGKP Contributors
// SPDX-License-Identifier: Apache-2.0

//! Error probabilities of qudit measurements and two-photon interference
//! under finite coherent and incoherent broadening, the threshold
//! inequalities that bound them, and the hardware requirements they imply.
//!
//! Widths are FWHMs: `Delta = sqrt(8 ln 2) sigma` for Gaussians and
//! `Delta = 2 gamma` for Lorentzians. Time in ps, angular frequency in rad/ps.

use std::f64::consts::{FRAC_2_PI, LN_2, PI};
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erf, erf_inv};

use crate::elements::InterleaverSpec;
use crate::func::AnalyticShape;
use crate::quad::integrate_with_breaks;
use crate::states::temporal_gaussian_envelope;
use crate::{Error, Result};

/// Tolerance handed to the adaptive integrator by every quadrature variant.
pub const QUAD_TOL: f64 = 1e-12;

/// Gaussian integrands are cut at this many standard deviations.
const GAUSS_CUT: f64 = 12.0;

/// Passband copies summed explicitly on each side by the exact OI-bank
/// ratio before the analytic Lorentzian tail takes over.
const OI_COPIES: i64 = 256;

pub fn fwhm_to_sigma(fwhm: f64) -> f64 {
    fwhm / (8.0 * LN_2).sqrt()
}

pub fn sigma_to_fwhm(sigma: f64) -> f64 {
    sigma * (8.0 * LN_2).sqrt()
}

pub fn fwhm_to_gamma(fwhm: f64) -> f64 {
    0.5 * fwhm
}

/// Which function the printed `erf` stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErfConvention {
    /// `erf(x) = (2/sqrt(pi)) int_0^x exp(-t^2) dt`.
    Standard,
    /// `erf(x / sqrt 2)`, the probability that a unit normal lies in `[-x, x]`.
    NormalCdf,
}

impl ErfConvention {
    pub const ALL: [ErfConvention; 2] = [ErfConvention::Standard, ErfConvention::NormalCdf];

    pub fn erf(self, x: f64) -> f64 {
        match self {
            ErfConvention::Standard => erf(x),
            ErfConvention::NormalCdf => erf(x / std::f64::consts::SQRT_2),
        }
    }

    pub fn erf_inv(self, y: f64) -> f64 {
        match self {
            ErfConvention::Standard => erf_inv(y),
            ErfConvention::NormalCdf => std::f64::consts::SQRT_2 * erf_inv(y),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ErfConvention::Standard => "standard",
            ErfConvention::NormalCdf => "normal_cdf",
        }
    }
}

/// Broadening widths of a TFGKP qudit and its detection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BroadeningSpec {
    /// Incoherent temporal FWHM (detector jitter), ps.
    pub dt_i: f64,
    /// Coherent temporal FWHM of each peak, ps.
    pub dt_c: f64,
    /// Coherent spectral FWHM of each comb line, rad/ps.
    pub df_c: f64,
    /// Incoherent spectral FWHM (Gaussian), rad/ps. Usually zero.
    #[serde(default)]
    pub df_i: f64,
    pub d: usize,
    /// Comb line spacing, rad/ps.
    pub omega_r: f64,
}

impl BroadeningSpec {
    pub fn new(dt_i: f64, dt_c: f64, df_c: f64, d: usize, omega_r: f64) -> Result<Self> {
        let s = Self { dt_i, dt_c, df_c, df_i: 0.0, d, omega_r };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("dt_i", self.dt_i), ("dt_c", self.dt_c), ("df_c", self.df_c), ("df_i", self.df_i)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(crate::invalid(format!("{name} must be a finite width >= 0, got {v}")));
            }
        }
        if self.d == 0 {
            return Err(crate::invalid("d must be at least 1"));
        }
        if !(self.omega_r > 0.0 && self.omega_r.is_finite()) {
            return Err(crate::invalid(format!("omega_r must be positive, got {}", self.omega_r)));
        }
        Ok(())
    }

    pub fn sigma_ti(&self) -> f64 {
        fwhm_to_sigma(self.dt_i)
    }

    pub fn sigma_tc(&self) -> f64 {
        fwhm_to_sigma(self.dt_c)
    }

    pub fn gamma_fc(&self) -> f64 {
        fwhm_to_gamma(self.df_c)
    }

    pub fn sigma_fi(&self) -> f64 {
        fwhm_to_sigma(self.df_i)
    }

    pub fn tau_r(&self) -> f64 {
        2.0 * PI * self.d as f64 / self.omega_r
    }

    /// `tau_r / 2d`, half the spacing of time bins.
    pub fn time_halfbin(&self) -> f64 {
        self.tau_r() / (2.0 * self.d as f64)
    }

    /// `omega_r / 2d`, half the spacing of frequency bins.
    pub fn freq_halfbin(&self) -> f64 {
        self.omega_r / (2.0 * self.d as f64)
    }

    fn with(&self, param: SweepParam, v: f64) -> Self {
        let mut s = *self;
        match param {
            SweepParam::DtI => s.dt_i = v,
            SweepParam::DtC => s.dt_c = v,
            SweepParam::DfC => s.df_c = v,
        }
        s
    }
}

fn gauss_pdf(x: f64, sigma: f64) -> f64 {
    (-(x * x) / (2.0 * sigma * sigma)).exp() / ((2.0 * PI).sqrt() * sigma)
}

/// `|phi_t_hat(t)|^2`, the temporal intensity of one coherent peak.
fn coherent_peak_intensity(sigma_tc: f64) -> impl Fn(f64) -> f64 {
    let amp = AnalyticShape::gaussian_amplitude(sigma_tc);
    move |t| amp.eval(t).norm_sqr()
}

/// `int Phi(u) g(x - u) du` for a Gaussian `Phi` of width `sigma`.
fn smear(g: &dyn Fn(f64) -> f64, x: f64, sigma: f64, feature: f64) -> f64 {
    let cut = GAUSS_CUT * sigma;
    let lo = -cut;
    let hi = cut;
    let breaks = [0.0, x, x - feature, x + feature];
    integrate_with_breaks(|u| gauss_pdf(u, sigma) * g(x - u), lo, hi, &breaks, QUAD_TOL * 1e-2).value
}

/// `1 - erf[(tau_r / 2d) / sqrt(sigma_tc^2 + sigma_ti^2)]` under the given
/// reading of `erf`.
pub fn e_t1_closed(spec: &BroadeningSpec, conv: ErfConvention) -> f64 {
    let s = spec.sigma_tc().hypot(spec.sigma_ti());
    if s == 0.0 {
        return 0.0;
    }
    1.0 - conv.erf(spec.time_halfbin() / s)
}

/// Probability that the jitter-smeared temporal peak falls outside its own
/// time bin, by nested adaptive quadrature of the convolution.
pub fn e_t1_quad(spec: &BroadeningSpec) -> f64 {
    let a = spec.time_halfbin();
    let (sc, si) = (spec.sigma_tc(), spec.sigma_ti());
    let inside = match (sc > 0.0, si > 0.0) {
        (false, false) => return 0.0,
        (true, false) => {
            let g = coherent_peak_intensity(sc);
            integrate_with_breaks(g, -a, a, &[0.0], QUAD_TOL).value
        }
        (false, true) => integrate_with_breaks(|x| gauss_pdf(x, si), -a, a, &[0.0], QUAD_TOL).value,
        (true, true) => {
            let g = coherent_peak_intensity(sc);
            integrate_with_breaks(|x| smear(&g, x, si, 3.0 * sc), -a, a, &[0.0], QUAD_TOL).value
        }
    };
    (1.0 - inside).max(0.0)
}

/// `e_t1` under both readings of `erf` and by quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Et1Report {
    pub closed_standard: f64,
    pub closed_normal_cdf: f64,
    pub quadrature: f64,
}

impl Et1Report {
    /// Which convention reproduces the quadrature, if either does to `tol`.
    pub fn matching_convention(&self, tol: f64) -> Option<ErfConvention> {
        if (self.closed_normal_cdf - self.quadrature).abs() <= tol {
            Some(ErfConvention::NormalCdf)
        } else if (self.closed_standard - self.quadrature).abs() <= tol {
            Some(ErfConvention::Standard)
        } else {
            None
        }
    }
}

pub fn e_t1(spec: &BroadeningSpec) -> Et1Report {
    Et1Report {
        closed_standard: e_t1_closed(spec, ErfConvention::Standard),
        closed_normal_cdf: e_t1_closed(spec, ErfConvention::NormalCdf),
        quadrature: e_t1_quad(spec),
    }
}

/// `1 - (2/pi) arctan[(omega_r / 2d) / gamma_fc]`.
pub fn e_f1_closed(spec: &BroadeningSpec) -> f64 {
    let g = spec.gamma_fc();
    if g == 0.0 {
        return 0.0;
    }
    1.0 - FRAC_2_PI * (spec.freq_halfbin() / g).atan()
}

/// `e_f1` when detections are folded by `omega_r` before snapping, so tail
/// mass landing on another copy of the right bin counts as correct. The
/// folded Lorentzian is a wrapped Cauchy distribution:
/// `1 - (2/pi) atan[coth(pi gamma / omega_r) tan(pi / 2d)]`.
pub fn e_f1_folded(spec: &BroadeningSpec) -> f64 {
    let g = spec.gamma_fc();
    if g == 0.0 {
        return 0.0;
    }
    if spec.d == 1 {
        return 0.0;
    }
    let coth = 1.0 / (PI * g / spec.omega_r).tanh();
    1.0 - FRAC_2_PI * (coth * (PI / (2.0 * spec.d as f64)).tan()).atan()
}

/// Probability density of the detected detuning of one comb line:
/// `|f_L|^2`, smeared by the incoherent spectral response when present.
fn line_pdf(spec: &BroadeningSpec) -> Box<dyn Fn(f64) -> f64 + Sync> {
    let g = spec.gamma_fc();
    let si = spec.sigma_fi();
    let lorentz = move |x: f64| AnalyticShape::lorentzian(g).eval(x).norm_sqr();
    match (g > 0.0, si > 0.0) {
        (true, false) => Box::new(lorentz),
        (true, true) => Box::new(move |x| smear(&lorentz, x, si, 3.0 * g)),
        (false, true) => Box::new(move |x| gauss_pdf(x, si)),
        (false, false) => Box::new(|_| 0.0),
    }
}

/// Lorentzian mass inside its frequency bin by quadrature.
pub fn e_f1_quad(spec: &BroadeningSpec) -> f64 {
    let a = spec.freq_halfbin();
    if spec.gamma_fc() == 0.0 && spec.sigma_fi() == 0.0 {
        return 0.0;
    }
    let p = line_pdf(spec);
    let w = spec.gamma_fc().max(spec.sigma_fi());
    let inside = integrate_with_breaks(&p, -a, a, &[0.0, -w, w, -10.0 * w, 10.0 * w], QUAD_TOL).value;
    (1.0 - inside).max(0.0)
}

fn check_t2(spec: &BroadeningSpec) -> Result<()> {
    if spec.sigma_tc() == 0.0 && spec.sigma_ti() > 0.0 {
        return Err(crate::invalid("temporal distinguishability is undefined for a zero coherent width"));
    }
    Ok(())
}

/// `1 - (1 + sigma_ti^2 / 2 sigma_tc^2)^(-1/2)`.
pub fn e_t2_closed(spec: &BroadeningSpec) -> Result<f64> {
    check_t2(spec)?;
    let (sc, si) = (spec.sigma_tc(), spec.sigma_ti());
    if si == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 - (1.0 + si * si / (2.0 * sc * sc)).powf(-0.5))
}

/// `G_t(delta) = |int phi_t_hat*(tau) phi_t_hat(tau + delta) dtau|^2`.
pub fn g_t(sigma_tc: f64, delta: f64) -> f64 {
    let amp = AnalyticShape::gaussian_amplitude(sigma_tc);
    let cut = GAUSS_CUT * sigma_tc;
    let lo = (-cut).min(-cut - delta);
    let hi = cut.max(cut - delta);
    let v = integrate_with_breaks(
        |t| (amp.eval(t).conj() * amp.eval(t + delta)).re,
        lo,
        hi,
        &[0.0, -delta],
        QUAD_TOL * 1e-2,
    );
    v.value * v.value
}

/// Two-photon visibility `(Phi_t * G_t)(0)` by nested quadrature.
pub fn visibility(spec: &BroadeningSpec) -> Result<f64> {
    check_t2(spec)?;
    let (sc, si) = (spec.sigma_tc(), spec.sigma_ti());
    if si == 0.0 {
        return Ok(if sc == 0.0 { 1.0 } else { g_t(sc, 0.0) });
    }
    let cut = GAUSS_CUT * si;
    Ok(integrate_with_breaks(|u| gauss_pdf(u, si) * g_t(sc, -u), -cut, cut, &[0.0], QUAD_TOL).value)
}

pub fn e_t2_quad(spec: &BroadeningSpec) -> Result<f64> {
    Ok((1.0 - visibility(spec)?).max(0.0))
}

/// Published constants for `e = 0.01`. Used only for comparison.
pub const PUBLISHED_TI_TC: f64 = 0.202;
pub const PUBLISHED_TC_BIN: f64 = 0.476;
pub const PUBLISHED_FC_BIN: f64 = 0.016;
pub const PUBLISHED_FINESSE: f64 = 66.0;

/// Whether a [`BroadeningSpec`] meets each inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PassFlags {
    pub ti_tc: bool,
    pub tc_bin: bool,
    pub fc_bin: bool,
}

impl PassFlags {
    pub fn all(&self) -> bool {
        self.ti_tc && self.tc_bin && self.fc_bin
    }
}

/// The three sufficient conditions for all error probabilities to stay
/// below `e`:
/// `Delta_ti / Delta_tc <= sqrt(A)`,
/// `Delta_tc / (tau_r/d) <= sqrt(2 ln 2 / (1 + A)) / erf^-1(1 - e)` and
/// `Delta_fc / (omega_r/d) <= 1 / tan(pi (1 - e) / 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub e: f64,
    /// `A = 2((1 - e)^-2 - 1)`.
    pub a: f64,
    pub bound_ratio_ti_tc: f64,
    /// Middle constant under the convention the quadrature validates; the
    /// pass flags use this one.
    pub bound_ratio_tc_bin: f64,
    pub bound_ratio_tc_bin_standard: f64,
    pub bound_ratio_tc_bin_normal_cdf: f64,
    pub bound_ratio_fc_bin: f64,
    /// Line spacing of one bin over the largest allowed linewidth.
    pub finesse: f64,
    pub pass: Option<PassFlags>,
}

pub fn thresholds(e: f64) -> Result<ThresholdReport> {
    if !(e > 0.0 && e < 1.0) {
        return Err(crate::invalid(format!("error threshold must lie in (0, 1), got {e}")));
    }
    let a = 2.0 * ((1.0 - e).powi(-2) - 1.0);
    let pre = (2.0 * LN_2 / (1.0 + a)).sqrt();
    let tc = |c: ErfConvention| pre / c.erf_inv(1.0 - e);
    let fc = 1.0 / (PI * (1.0 - e) / 2.0).tan();
    Ok(ThresholdReport {
        e,
        a,
        bound_ratio_ti_tc: a.sqrt(),
        bound_ratio_tc_bin: tc(ErfConvention::NormalCdf),
        bound_ratio_tc_bin_standard: tc(ErfConvention::Standard),
        bound_ratio_tc_bin_normal_cdf: tc(ErfConvention::NormalCdf),
        bound_ratio_fc_bin: fc,
        finesse: 1.0 / fc,
        pass: None,
    })
}

impl ThresholdReport {
    pub fn tc_bin(&self, conv: ErfConvention) -> f64 {
        match conv {
            ErfConvention::Standard => self.bound_ratio_tc_bin_standard,
            ErfConvention::NormalCdf => self.bound_ratio_tc_bin_normal_cdf,
        }
    }

    pub fn check(&self, spec: &BroadeningSpec) -> PassFlags {
        let bin_t = spec.tau_r() / spec.d as f64;
        let bin_f = spec.omega_r / spec.d as f64;
        PassFlags {
            ti_tc: spec.dt_i <= self.bound_ratio_ti_tc * spec.dt_c,
            tc_bin: spec.dt_c <= self.bound_ratio_tc_bin * bin_t,
            fc_bin: spec.df_c <= self.bound_ratio_fc_bin * bin_f,
        }
    }

    pub fn with_check(mut self, spec: &BroadeningSpec) -> Self {
        self.pass = Some(self.check(spec));
        self
    }

    /// `(value - published) / published` for the three constants, middle one under
    /// each convention.
    pub fn published_deviations(&self) -> [(&'static str, f64, f64); 4] {
        let rel = |v: f64, p: f64| (v - p) / p;
        [
            ("ti_tc", self.bound_ratio_ti_tc, rel(self.bound_ratio_ti_tc, PUBLISHED_TI_TC)),
            (
                "tc_bin_standard",
                self.bound_ratio_tc_bin_standard,
                rel(self.bound_ratio_tc_bin_standard, PUBLISHED_TC_BIN),
            ),
            (
                "tc_bin_normal_cdf",
                self.bound_ratio_tc_bin_normal_cdf,
                rel(self.bound_ratio_tc_bin_normal_cdf, PUBLISHED_TC_BIN),
            ),
            ("fc_bin", self.bound_ratio_fc_bin, rel(self.bound_ratio_fc_bin, PUBLISHED_FC_BIN)),
        ]
    }
}

/// Hardware bounds implied by a detector jitter. `None` means unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HardwareRequirements {
    pub dt_i: f64,
    pub e: f64,
    pub d: usize,
    pub convention: ErfConvention,
    /// Minimum coherent temporal FWHM, ps.
    pub dt_c_min: f64,
    /// Minimum time-bin spacing `tau_r / d`, ps.
    pub time_bin_min: f64,
    /// Maximum line spacing `omega_r`, rad/ps.
    pub omega_r_max: Option<f64>,
    /// Maximum coherent linewidth `Delta_fc`, rad/ps.
    pub df_c_max: Option<f64>,
    /// `(omega_r / d) / Delta_fc` at the bound.
    pub finesse: f64,
    /// Comb lines within the spectral envelope, `2 pi / (Delta_tc omega_r / d)`.
    pub comb_lines: Option<f64>,
}

impl HardwareRequirements {
    pub fn omega_r_max_ghz(&self) -> Option<f64> {
        self.omega_r_max.map(|w| w / (2.0 * PI) * 1e3)
    }

    pub fn df_c_max_ghz(&self) -> Option<f64> {
        self.df_c_max.map(|w| w / (2.0 * PI) * 1e3)
    }
}

/// Inverts the three inequalities in turn.
pub fn hardware_requirements(dt_i: f64, e: f64, d: usize, convention: ErfConvention) -> Result<HardwareRequirements> {
    if !(dt_i >= 0.0 && dt_i.is_finite()) {
        return Err(crate::invalid(format!("jitter FWHM must be >= 0, got {dt_i}")));
    }
    if d == 0 {
        return Err(crate::invalid("d must be at least 1"));
    }
    let t = thresholds(e)?;
    let dt_c_min = dt_i / t.bound_ratio_ti_tc;
    let time_bin_min = dt_c_min / t.tc_bin(convention);
    let (omega_r_max, df_c_max, comb_lines) = if time_bin_min > 0.0 {
        // tau_r / d = 2 pi / omega_r
        let w = 2.0 * PI / time_bin_min;
        (Some(w), Some(t.bound_ratio_fc_bin * w / d as f64), Some(time_bin_min / dt_c_min * d as f64))
    } else {
        (None, None, None)
    };
    Ok(HardwareRequirements {
        dt_i,
        e,
        d,
        convention,
        dt_c_min,
        time_bin_min,
        omega_r_max,
        df_c_max,
        finesse: t.finesse,
        comb_lines,
    })
}

/// Detection through a bank of OIs and bucket detectors instead of a
/// frequency-resolving detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OiBankReport {
    /// `F_x` for `x = -1, 0, 1`: the line's probability inside the passband
    /// shifted by `x omega_r / d`, times the envelope factor.
    pub f_minus1: f64,
    pub f_0: f64,
    pub f_1: f64,
    /// `sum_n |g_I|^2 |phi_t|^2 / sum_n |phi_t|^2` over the comb lines.
    pub envelope_factor: f64,
    /// `(F_1 + F_{-1}) / F_0`.
    pub nearest_neighbour: f64,
    /// Mass outside the line's own passband over all mass: every neighbouring
    /// passband counts as an error, as in the arctan form.
    pub single_passband: f64,
    /// `sum_{k != 0} F_k / sum_k F_k` with every passband copy of each port,
    /// so far tails landing on a copy of the right port count as correct.
    pub exact: f64,
}

fn passband_mass(
    spec: &BroadeningSpec,
    oi: &InterleaverSpec,
    pdf: &(dyn Fn(f64) -> f64 + Sync),
    x: i64,
    h: f64,
) -> f64 {
    let c = x as f64 * oi.bin_spacing();
    let w = spec.gamma_fc().max(spec.sigma_fi()).max(1e-300);
    let mut breaks = vec![c, 0.0, -w, w];
    for k in -4..=4 {
        breaks.push(c + 0.25 * k as f64 * h);
    }
    integrate_with_breaks(|y| oi.peak.eval(c - y).norm_sqr() * pdf(y), c - h, c + h, &breaks, QUAD_TOL * 1e-2).value
}

/// Evaluates the `F_x` of a frequency measurement through `oi`, with the
/// photon's temporal envelope set by `spec.dt_c`.
pub fn oi_bank_error(spec: &BroadeningSpec, oi: &InterleaverSpec) -> Result<OiBankReport> {
    spec.validate()?;
    oi.validate()?;
    if oi.d != spec.d || (oi.omega_r - spec.omega_r).abs() > 1e-12 * spec.omega_r {
        return Err(crate::invalid("interleaver and broadening spec disagree on d or omega_r"));
    }
    let h = match oi.passband_halfwidth() {
        Some(h) if h <= 0.5 * oi.omega_r * (1.0 + 1e-12) => h,
        _ => return Err(Error::Unsupported("OI passband must vanish beyond omega_r / 2".into())),
    };
    let pdf = line_pdf(spec);

    let env = if spec.sigma_tc() > 0.0 { Some(temporal_gaussian_envelope(spec.sigma_tc())) } else { None };
    let lines = match &env {
        Some(e) => {
            let (_, hi) = e.support_hint().unwrap_or((0.0, 64.0 * spec.omega_r));
            ((hi / spec.omega_r).ceil() as i64).clamp(1, 1 << 16)
        }
        None => 64,
    };
    let (mut num, mut den) = (0.0, 0.0);
    for n in -lines..=lines {
        let x = n as f64 * spec.omega_r;
        let p = env.as_ref().map_or(1.0, |e| e.eval(x).norm_sqr());
        num += oi.envelope.eval(-x).norm_sqr() * p;
        den += p;
    }
    let envelope_factor = num / den;

    let copies = OI_COPIES * spec.d as i64;
    let masses: Vec<(i64, f64)> =
        (-copies..=copies).into_par_iter().map(|x| (x, passband_mass(spec, oi, &pdf, x, h))).collect();
    let get = |x: i64| masses.iter().find(|m| m.0 == x).map_or(0.0, |m| m.1);
    let (p_m1, p_0, p_1) = (get(-1), get(0), get(1));

    // Lorentzian mass beyond the explicit copies, spread evenly over ports
    let passband_area = integrate_with_breaks(|y| oi.peak.eval(y).norm_sqr(), -h, h, &[0.0], QUAD_TOL).value;
    let edge = (copies as f64 + 0.5) * oi.bin_spacing();
    let tail = if spec.gamma_fc() > 0.0 {
        (1.0 - FRAC_2_PI * (edge / spec.gamma_fc()).atan()) * passband_area / oi.bin_spacing()
    } else {
        0.0
    };
    let total: f64 = masses.iter().map(|m| m.1).sum::<f64>() + tail;
    let right: f64 =
        masses.iter().filter(|m| m.0.rem_euclid(spec.d as i64) == 0).map(|m| m.1).sum::<f64>() + tail / spec.d as f64;

    Ok(OiBankReport {
        f_minus1: p_m1 * envelope_factor,
        f_0: p_0 * envelope_factor,
        f_1: p_1 * envelope_factor,
        envelope_factor,
        nearest_neighbour: if spec.d > 1 { (p_1 + p_m1) / p_0 } else { 0.0 },
        single_passband: (total - p_0) / total,
        exact: if spec.d > 1 { (total - right) / total } else { 0.0 },
    })
}

/// Parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    DtI,
    DtC,
    DfC,
}

impl SweepParam {
    pub fn column(self) -> &'static str {
        match self {
            SweepParam::DtI => "dt_i_ps",
            SweepParam::DtC => "dt_c_ps",
            SweepParam::DfC => "df_c_rad_per_ps",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub e_t1_closed: f64,
    pub e_t1_quad: f64,
    pub e_f1_closed: f64,
    pub e_f1_quad: f64,
    pub e_t2_closed: Option<f64>,
    pub e_t2_quad: Option<f64>,
    pub e_t1_closed_standard: f64,
}

/// Evaluates all error probabilities at each value, in input order.
pub fn sweep(base: &BroadeningSpec, param: SweepParam, values: &[f64]) -> Result<Vec<SweepRow>> {
    base.validate()?;
    values
        .par_iter()
        .map(|&v| {
            let s = base.with(param, v);
            s.validate()?;
            Ok(SweepRow {
                value: v,
                e_t1_closed: e_t1_closed(&s, ErfConvention::NormalCdf),
                e_t1_quad: e_t1_quad(&s),
                e_f1_closed: e_f1_closed(&s),
                e_f1_quad: e_f1_quad(&s),
                e_t2_closed: e_t2_closed(&s).ok(),
                e_t2_quad: e_t2_quad(&s).ok(),
                e_t1_closed_standard: e_t1_closed(&s, ErfConvention::Standard),
            })
        })
        .collect()
}

/// `lo..=hi` in `n` equal steps.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

pub fn write_sweep_csv<W: Write>(w: W, param: SweepParam, rows: &[SweepRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        param.column(),
        "e_t1_closed",
        "e_t1_quad",
        "e_f1_closed",
        "e_f1_quad",
        "e_t2_closed",
        "e_t2_quad",
        "e_t1_closed_standard",
    ])?;
    let opt = |v: Option<f64>| v.map_or_else(String::new, |x| format!("{x:.12e}"));
    for r in rows {
        out.write_record([
            format!("{:.12e}", r.value),
            format!("{:.12e}", r.e_t1_closed),
            format!("{:.12e}", r.e_t1_quad),
            format!("{:.12e}", r.e_f1_closed),
            format!("{:.12e}", r.e_f1_quad),
            opt(r.e_t2_closed),
            opt(r.e_t2_quad),
            format!("{:.12e}", r.e_t1_closed_standard),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Mass of a unit Lorentzian PDF beyond `|x| > cut`, the truncation error of
/// any real-line Lorentzian integral cut at `cut`.
pub fn lorentzian_tail(gamma: f64, cut: f64) -> f64 {
    1.0 - FRAC_2_PI * (cut / gamma).atan()
}
