// Copyright 2026 TFGKP Contributors
// SPDX-License-Identifier: Apache-2.0

//! Physical TFGKP qudit states.
//!
//! Amplitudes are stored at baseband: the spectral amplitude is a function of
//! the detuning `D = omega - omega_0`, the temporal amplitude a function of
//! time `t` (the carrier `exp(-i omega_0 t)` is dropped). With a wave packet
//! written as `(xi * a^dag)(omega_0)` the spectral amplitude of `a^dag(omega)`
//! is `xi(omega_0 - omega)`, i.e. the reflection of `xi`, and the temporal
//! amplitude is the forward transform of the spectral one. Propagation for
//! `tau_0` multiplies the spectral amplitude by `exp(i D tau_0)` and moves the
//! temporal peaks to `tau_0 + ...`.
//!
//! The envelope `phi_t` is stored on the frequency axis, as it enters the
//! spectral amplitude, even though it controls the temporal peak width. Use
//! [`temporal_gaussian_envelope`] to build it from a temporal width.

use std::f64::consts::{LN_2, PI};
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::func::{
    AnalyticShape, AxisKind, CombFunction, GridFunction, GridSpec, Repr, ShapeKind, TimeFrequencyFunction,
};
use crate::{invalid, Error, Result};

/// Lines kept on each side when the envelope does not decay.
pub const FLAT_ENVELOPE_HALF_LINES: i64 = 64;

const MAX_GRID_POINTS: usize = 1 << 22;
const MIN_GRID_POINTS: usize = 1 << 14;

/// Group-velocity dispersion accumulated along a fiber.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionRecord {
    /// `k'' L` in ps^2.
    pub k2l: f64,
    /// Group slowness `k'` in ps per unit length, if known.
    #[serde(default)]
    pub k1: Option<f64>,
    /// Fiber length, if known.
    #[serde(default)]
    pub length: Option<f64>,
}

impl DispersionRecord {
    pub fn new(k2l: f64) -> Self {
        Self { k2l, k1: None, length: None }
    }

    /// `exp(-i k2l D^2 / 2)` at detuning `D`.
    pub fn factor(&self, detuning: f64) -> Complex64 {
        Complex64::from_polar(1.0, -0.5 * self.k2l * detuning * detuning)
    }

    /// Successive fibers add their `k'' L`.
    pub fn compose(&self, other: &DispersionRecord) -> DispersionRecord {
        let length = match (self.length, other.length) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
        let k1 = if self.k1 == other.k1 { self.k1 } else { None };
        DispersionRecord { k2l: self.k2l + other.k2l, k1, length }
    }

    /// Coherent broadening scale `sqrt(8 ln2 k''L)`, the smallest FWHM a
    /// Gaussian pulse can have after this dispersion.
    pub fn broadening_scale(&self) -> f64 {
        (8.0 * LN_2 * self.k2l.abs()).sqrt()
    }
}

/// FWHM after dispersion of a transform-limited Gaussian pulse of FWHM
/// `fwhm`: `sqrt(fwhm^4 + (4 ln2 k2l)^2) / fwhm`.
pub fn chirped_gaussian_fwhm(fwhm: f64, k2l: f64) -> f64 {
    let b = 4.0 * LN_2 * k2l;
    (fwhm.powi(4) + b * b).sqrt() / fwhm
}

/// Which logical state the photon carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "index", rename_all = "snake_case")]
pub enum BasisLabel {
    Frequency(usize),
    Time(usize),
}

impl BasisLabel {
    pub fn index(&self) -> usize {
        match self {
            BasisLabel::Frequency(j) | BasisLabel::Time(j) => *j,
        }
    }
}

/// How a time-basis state is assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeConstruction {
    /// DFT of the frequency-basis states.
    #[default]
    Dft,
    /// Temporal comb built directly in the time domain.
    Direct,
}

/// Parameters of a state; the JSON form of a state is exactly this struct.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDescriptor {
    pub d: usize,
    /// Line spacing `omega_r` in rad/ps.
    pub omega_r: f64,
    /// Carrier `omega_0` in rad/ps.
    pub omega_0: f64,
    /// Propagation time `tau_0` in ps.
    #[serde(default)]
    pub tau_0: f64,
    pub basis: BasisLabel,
    /// Peak amplitude `phi_f`, frequency axis.
    pub peak: AnalyticShape,
    /// Envelope amplitude `phi_t`, frequency axis.
    pub envelope: AnalyticShape,
    #[serde(default)]
    pub dispersion: Option<DispersionRecord>,
    #[serde(default)]
    pub construction: TimeConstruction,
}

/// A normalized physical TFGKP state.
#[derive(Debug, Clone, PartialEq)]
pub struct TfgkpState {
    desc: StateDescriptor,
    /// Factor applied to the raw construction to reach unit norm.
    norm: f64,
}

/// Frequency-axis envelope whose temporal intensity is a Gaussian of
/// standard deviation `sigma_t` (ps): the inverse transform of
/// `(8 pi sigma_t^2)^(1/4) f_G(t; sqrt2 sigma_t)`.
pub fn temporal_gaussian_envelope(sigma_t: f64) -> AnalyticShape {
    AnalyticShape::gaussian_amplitude(sigma_t).inverse_fourier()
}

/// Lorentzian peak amplitude with intensity half width `gamma` (rad/ps).
pub fn lorentzian_peak(gamma: f64) -> AnalyticShape {
    AnalyticShape::lorentzian(gamma)
}

fn shape_width(s: &AnalyticShape) -> Option<f64> {
    match &s.kind {
        ShapeKind::Gaussian { sigma } => Some(*sigma),
        ShapeKind::Lorentzian { gamma } | ShapeKind::CausalExp { gamma } => Some(*gamma),
        ShapeKind::Rect { halfwidth } => Some(*halfwidth),
        ShapeKind::Sinc { halfwidth } => Some(1.0 / halfwidth),
        ShapeKind::Custom(g) => Some(g.step() * 8.0),
        ShapeKind::Dirac | ShapeKind::Flat => None,
    }
}

/// FWHM of `|s|^2` for the common peak kinds.
pub fn intensity_fwhm(s: &AnalyticShape) -> Option<f64> {
    match &s.kind {
        // |f_G(x; s)|^2 is a Gaussian of std s/sqrt2
        ShapeKind::Gaussian { sigma } => Some(2.0 * LN_2.sqrt() * sigma),
        ShapeKind::Lorentzian { gamma } => Some(2.0 * gamma),
        ShapeKind::Rect { halfwidth } => Some(2.0 * halfwidth),
        _ => None,
    }
}

impl TfgkpState {
    /// Frequency-basis state `|j_f>`: spectral lines at
    /// `omega_0 + (j/d) omega_r + n omega_r`, `tau_0 = 0`.
    pub fn frequency_basis(
        j: usize,
        d: usize,
        omega_r: f64,
        omega_0: f64,
        peak: AnalyticShape,
        envelope: AnalyticShape,
    ) -> Result<Self> {
        Self::from_descriptor(StateDescriptor {
            d,
            omega_r,
            omega_0,
            tau_0: 0.0,
            basis: BasisLabel::Frequency(j),
            peak,
            envelope,
            dispersion: None,
            construction: TimeConstruction::Dft,
        })
    }

    /// Time-basis state `|j_t> = d^(-1/2) sum_k exp(i 2 pi j k / d) |k_f>`,
    /// with temporal peaks at `tau_0 + (j/d) tau_r + n tau_r`.
    pub fn time_basis(
        j: usize,
        d: usize,
        omega_r: f64,
        omega_0: f64,
        peak: AnalyticShape,
        envelope: AnalyticShape,
        construction: TimeConstruction,
    ) -> Result<Self> {
        Self::from_descriptor(StateDescriptor {
            d,
            omega_r,
            omega_0,
            tau_0: 0.0,
            basis: BasisLabel::Time(j),
            peak,
            envelope,
            dispersion: None,
            construction,
        })
    }

    pub fn from_descriptor(desc: StateDescriptor) -> Result<Self> {
        if desc.d == 0 {
            return Err(invalid("d must be at least 1"));
        }
        if desc.basis.index() >= desc.d {
            return Err(Error::IndexOutOfRange { index: desc.basis.index(), dim: desc.d });
        }
        if !(desc.omega_r > 0.0 && desc.omega_r.is_finite()) {
            return Err(invalid(format!("omega_r must be positive, got {}", desc.omega_r)));
        }
        if desc.envelope.is_dirac() || desc.peak.is_flat() {
            return Err(Error::NotNormalizable("envelope must not be a delta and the peak must not be flat".into()));
        }
        let mut s = Self { desc, norm: 1.0 };
        let n2 = s.raw_norm_sqr()?;
        if !(n2 > 0.0 && n2.is_finite()) {
            return Err(Error::NotNormalizable(format!("state norm^2 = {n2}")));
        }
        s.norm = 1.0 / n2.sqrt();
        Ok(s)
    }

    pub fn descriptor(&self) -> &StateDescriptor {
        &self.desc
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.desc)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_descriptor(serde_json::from_str(s)?)
    }

    pub fn d(&self) -> usize {
        self.desc.d
    }
    pub fn omega_r(&self) -> f64 {
        self.desc.omega_r
    }
    pub fn omega_0(&self) -> f64 {
        self.desc.omega_0
    }
    pub fn tau_0(&self) -> f64 {
        self.desc.tau_0
    }
    pub fn basis(&self) -> BasisLabel {
        self.desc.basis
    }
    pub fn dispersion(&self) -> Option<DispersionRecord> {
        self.desc.dispersion
    }

    /// Temporal period `tau_r = 2 pi d / omega_r`.
    pub fn tau_r(&self) -> f64 {
        2.0 * PI * self.desc.d as f64 / self.desc.omega_r
    }

    /// Global phase `exp(i omega_0 tau_0)` picked up by propagation.
    pub fn carrier_phase(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.desc.omega_0 * self.desc.tau_0)
    }

    /// Warning text when the peaks are broad compared to `omega_r / d`.
    pub fn width_warning(&self) -> Option<String> {
        let fwhm = intensity_fwhm(&self.desc.peak)?;
        let limit = 0.5 * self.desc.omega_r / self.desc.d as f64;
        (fwhm > limit).then(|| format!("peak FWHM {fwhm:.4e} exceeds half the bin spacing {limit:.4e}"))
    }

    fn half_window(&self) -> f64 {
        match self.desc.envelope.support_hint() {
            Some((lo, hi)) => lo.abs().max(hi.abs()),
            None => FLAT_ENVELOPE_HALF_LINES as f64 * self.desc.omega_r,
        }
    }

    /// Comb of `|k_f>` in detuning coordinates, without propagation phase.
    fn line_comb(&self, k: usize) -> Result<CombFunction> {
        let w = self.half_window();
        let (om, d) = (self.desc.omega_r, self.desc.d as f64);
        let offset = k as f64 * om / d;
        let n_min = ((-w - offset) / om).ceil() as i64;
        let n_max = ((w - offset) / om).floor() as i64;
        Ok(CombFunction {
            n_min,
            n_max,
            weights: AnalyticShape::flat(),
            peak: self.desc.peak.reflect(),
            envelope: self.desc.envelope.reflect(),
            ..CombFunction::dirac(om, offset, 0)?
        })
    }

    /// Direct temporal construction of `|j_t>` at `tau_0 = 0`:
    /// `(sqrt(2 pi) d / omega_r) ((T_{-j tau_r/d} C_{tau_r}) . R phi_f^) * R phi_t^`.
    fn direct_time_comb(&self, j: usize) -> Result<CombFunction> {
        let d = self.desc.d as f64;
        let tau_r = self.tau_r();
        let base = CombFunction {
            weights: self.desc.peak.reflect().fourier(),
            peak: self.desc.envelope.reflect().fourier(),
            envelope: AnalyticShape::flat(),
            ..CombFunction::dirac(tau_r, j as f64 * tau_r / d, 8)?
        };
        let scaled = base.scaled(Complex64::new((2.0 * PI).sqrt() * d / self.desc.omega_r, 0.0));
        // DFT normalization d^(-1/2) so both constructions share a raw scale
        Ok(scaled.scaled(Complex64::new(1.0 / d.sqrt(), 0.0)).truncate_adaptive(crate::func::DEFAULT_MASS_TOL))
    }

    fn dft_coefficient(&self, j: usize, k: usize) -> Complex64 {
        let d = self.desc.d as f64;
        Complex64::from_polar(1.0 / d.sqrt(), 2.0 * PI * (j * k) as f64 / d)
    }

    /// Spectral amplitude before normalization and propagation.
    fn raw_spectral(&self) -> Result<TimeFrequencyFunction> {
        let ax = AxisKind::AngularFrequency;
        match self.desc.basis {
            BasisLabel::Frequency(j) => Ok(TimeFrequencyFunction::comb(ax, self.line_comb(j)?)),
            BasisLabel::Time(j) => match self.desc.construction {
                TimeConstruction::Dft => {
                    let terms = (0..self.desc.d)
                        .map(|k| {
                            Ok(TimeFrequencyFunction::comb(ax, self.line_comb(k)?.scaled(self.dft_coefficient(j, k))))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    TimeFrequencyFunction::sum(terms)
                }
                TimeConstruction::Direct => {
                    TimeFrequencyFunction::comb(AxisKind::TimePs, self.direct_time_comb(j)?).inverse_fourier()
                }
            },
        }
    }

    /// Temporal amplitude before normalization and propagation.
    fn raw_temporal(&self) -> Result<TimeFrequencyFunction> {
        match (self.desc.basis, self.desc.construction) {
            (BasisLabel::Time(j), TimeConstruction::Direct) => {
                Ok(TimeFrequencyFunction::comb(AxisKind::TimePs, self.direct_time_comb(j)?))
            }
            _ => self.raw_spectral()?.fourier(),
        }
    }

    fn raw_norm_sqr(&self) -> Result<f64> {
        if self.desc.peak.is_dirac() {
            // Dirac lines: normalize the discrete line weights
            return Ok(line_weight_norm_sqr(&self.raw_spectral()?.repr));
        }
        // The temporal comb is the exact (infinite-line) transform and its
        // peaks are compact, unlike Lorentzian spectral lines whose tails make
        // any finite spectral sum converge slowly.
        let spec = self.temporal_grid();
        let raw = GridSpec { origin: spec.origin - self.desc.tau_0, ..spec };
        Ok(self.raw_temporal()?.sample(raw).norm_sqr())
    }

    /// Normalized spectral amplitude over detuning, including the
    /// propagation phase but not dispersion (which needs a grid).
    pub fn spectral_amplitude(&self) -> Result<TimeFrequencyFunction> {
        Ok(self.raw_spectral()?.scaled(Complex64::new(self.norm, 0.0)).modulate(-self.desc.tau_0))
    }

    /// Normalized temporal amplitude in closed form. Fails for dispersed
    /// states; use [`TfgkpState::temporal_amplitude_grid`] for those.
    pub fn temporal_amplitude(&self) -> Result<TimeFrequencyFunction> {
        if self.desc.dispersion.is_some() {
            return Err(Error::Unsupported("dispersed temporal amplitude is only available on a grid".into()));
        }
        Ok(self.raw_temporal()?.scaled(Complex64::new(self.norm, 0.0)).translate(-self.desc.tau_0))
    }

    fn temporal_peak_width(&self) -> f64 {
        let env_t = self.desc.envelope.reflect().fourier();
        let w = shape_width(&env_t).unwrap_or(self.tau_r() / (8.0 * self.desc.d as f64));
        w.min(self.tau_r() / (8.0 * self.desc.d as f64))
    }

    fn temporal_extent(&self) -> (f64, f64) {
        let t = self
            .raw_temporal()
            .ok()
            .and_then(|f| f.support_hint())
            .unwrap_or((-self.tau_r() * 8.0, self.tau_r() * 8.0));
        let spread =
            self.desc.dispersion.map(|r| 8.0 * r.broadening_scale() + r.k2l.abs() * self.half_window()).unwrap_or(0.0);
        (t.0 - spread, t.1 + spread)
    }

    /// Default detuning grid: covers the envelope, resolves the peaks and is
    /// fine enough that its conjugate time grid spans the whole pulse train.
    pub fn spectral_grid(&self) -> GridSpec {
        let d = self.desc.d as f64;
        let (t_lo, t_hi) = self.temporal_extent();
        let mut step = self.desc.omega_r / (16.0 * d);
        if let Some(w) = shape_width(&self.desc.peak) {
            step = step.min(w / 4.0);
        }
        step = step.min(2.0 * PI / (1.1 * (t_hi - t_lo)));
        let dt = self.temporal_peak_width() / 8.0;
        let half = self.half_window().max(PI / dt) * 1.05;
        let len = ((2.0 * half / step).ceil() as usize).next_power_of_two().clamp(MIN_GRID_POINTS, MAX_GRID_POINTS);
        let step = 2.0 * half / len as f64;
        GridSpec { origin: -(len as f64 / 2.0) * step, step, len }
    }

    /// Default time grid covering the pulse train around `tau_0`.
    pub fn temporal_grid(&self) -> GridSpec {
        let (lo, hi) = self.temporal_extent();
        let step = self.temporal_peak_width() / 8.0;
        let len = (((hi - lo) / step).ceil() as usize + 1).clamp(MIN_GRID_POINTS, MAX_GRID_POINTS);
        let pad = 0.02 * (hi - lo);
        GridSpec::covering(lo - pad + self.desc.tau_0, hi + pad + self.desc.tau_0, len).expect("nonempty extent")
    }

    /// Spectral amplitude on `spec`, including dispersion.
    pub fn spectral_amplitude_grid(&self, spec: GridSpec) -> Result<GridFunction> {
        let mut g = if self.desc.peak.is_compact_peak() {
            self.spectral_amplitude()?.sample(spec)
        } else {
            self.spectral_via_time(spec)?
        };
        if let Some(disp) = self.desc.dispersion {
            for (i, s) in g.samples_mut().iter_mut().enumerate() {
                *s *= disp.factor(spec.x(i));
            }
        }
        Ok(g)
    }

    /// Spectral samples as the inverse FFT of the closed-form temporal comb,
    /// done on `spec` directly when its conjugate grid covers the pulse
    /// train and resolves the peaks, otherwise on the default grid.
    fn spectral_via_time(&self, spec: GridSpec) -> Result<GridFunction> {
        let undispersed = Self { desc: StateDescriptor { dispersion: None, ..self.desc.clone() }, norm: self.norm };
        let temporal = undispersed.temporal_amplitude()?;
        let (lo, hi) = undispersed.temporal_extent();
        let dt = 2.0 * PI / (spec.len as f64 * spec.step);
        let span = dt * spec.len as f64;
        let fits = span >= 1.05 * (hi - lo) && dt <= self.temporal_peak_width() / 4.0;
        let (work, direct) = if fits { (spec, true) } else { (self.spectral_grid(), false) };
        let dt = 2.0 * PI / (work.len as f64 * work.step);
        let center = self.desc.tau_0 + 0.5 * (lo + hi);
        let tgrid = GridSpec::new(center - (work.len / 2) as f64 * dt, dt, work.len)?;
        let g = temporal.sample(tgrid).inverse_fourier_onto(work.origin);
        Ok(if direct { g } else { g.resample(spec) })
    }

    /// Temporal amplitude on `spec`. Closed form without dispersion,
    /// otherwise an FFT of the dispersed spectral amplitude.
    pub fn temporal_amplitude_grid(&self, spec: GridSpec) -> Result<GridFunction> {
        if self.desc.dispersion.is_none() {
            return Ok(self.temporal_amplitude()?.sample(spec));
        }
        let fspec = self.spectral_grid();
        let g = self.spectral_amplitude_grid(fspec)?;
        let conj = fspec.conjugate();
        let origin = self.desc.tau_0 - (conj.len / 2) as f64 * conj.step;
        Ok(g.fourier_onto(origin).resample(spec))
    }

    /// `|spectral amplitude|^2` over detuning.
    pub fn spectral_density(&self, spec: Option<GridSpec>) -> Result<GridFunction> {
        let spec = spec.unwrap_or_else(|| self.spectral_grid());
        Ok(density(self.spectral_amplitude_grid(spec)?))
    }

    /// `|temporal amplitude|^2` over time.
    pub fn temporal_density(&self, spec: Option<GridSpec>) -> Result<GridFunction> {
        let spec = spec.unwrap_or_else(|| self.temporal_grid());
        Ok(density(self.temporal_amplitude_grid(spec)?))
    }

    /// Propagation for an extra `tau` and optional extra dispersion.
    pub fn propagate(&self, tau: f64, dispersion: Option<DispersionRecord>) -> Self {
        let mut desc = self.desc.clone();
        desc.tau_0 += tau;
        desc.dispersion = match (desc.dispersion, dispersion) {
            (Some(a), Some(b)) => Some(a.compose(&b)),
            (a, b) => a.or(b),
        };
        Self { desc, norm: self.norm }
    }

    /// Approximate normalization `sum_m |phi_f^(m tau_r)|^2`.
    pub fn approx_normalization(&self) -> f64 {
        let ft = self.desc.peak.fourier();
        let tau_r = self.tau_r();
        let mut sum = ft.eval(0.0).norm_sqr();
        for m in 1..1_000_000 {
            let t = m as f64 * tau_r;
            let v = ft.eval(t).norm_sqr() + ft.eval(-t).norm_sqr();
            sum += v;
            if v < 1e-18 * sum {
                break;
            }
        }
        sum
    }

    /// `<self|other>` over detuning, on the union of both spectral grids.
    pub fn inner_product(&self, other: &TfgkpState) -> Result<Complex64> {
        let shift = other.desc.omega_0 - self.desc.omega_0;
        let a = self.spectral_grid();
        let b = other.spectral_grid();
        let span = 0.5 * (a.end() - a.origin).max(b.end() - b.origin);
        if shift.abs() > span {
            return Err(invalid(format!("carrier mismatch {shift} rad/ps exceeds the grid span")));
        }
        let step = a.step.min(b.step);
        let half = span + 0.5 * shift.abs();
        let len = ((2.0 * half / step).ceil() as usize).clamp(2, MAX_GRID_POINTS);
        let spec = GridSpec::covering(-half + 0.5 * shift.min(0.0), half + 0.5 * shift.max(0.0), len)?;
        let fa = self.spectral_amplitude_grid(spec)?;
        // other's amplitude over our detuning: psi_b(D - shift)
        let spec_b = GridSpec { origin: spec.origin - shift, ..spec };
        let fb = other.spectral_amplitude_grid(spec_b)?;
        let s: Complex64 = fa.samples().iter().zip(fb.samples()).map(|(x, y)| x.conj() * y).sum();
        Ok(s * spec.step)
    }

    /// Writes `x,re,im,density` for the spectral or temporal amplitude.
    pub fn write_csv<W: Write>(&self, w: W, axis: AxisKind, spec: Option<GridSpec>) -> Result<()> {
        let g = match axis {
            AxisKind::AngularFrequency => self.spectral_amplitude_grid(spec.unwrap_or_else(|| self.spectral_grid()))?,
            AxisKind::TimePs => self.temporal_amplitude_grid(spec.unwrap_or_else(|| self.temporal_grid()))?,
        };
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["x", "re", "im", "density"])?;
        for (i, s) in g.samples().iter().enumerate() {
            out.write_record([
                format!("{:.12e}", g.x(i)),
                format!("{:.12e}", s.re),
                format!("{:.12e}", s.im),
                format!("{:.12e}", s.norm_sqr()),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

fn density(g: GridFunction) -> GridFunction {
    let spec = g.spec();
    let axis = g.axis();
    let samples = g.samples().iter().map(|s| Complex64::new(s.norm_sqr(), 0.0)).collect();
    GridFunction::new(spec, axis, samples).expect("same length")
}

fn line_weight_norm_sqr(r: &Repr) -> f64 {
    match r {
        Repr::Comb(c) => (c.n_min..=c.n_max).map(|n| c.line_weight(n).norm_sqr() * c.peak.scale.norm_sqr()).sum(),
        Repr::Sum { terms } => terms.iter().map(line_weight_norm_sqr).sum(),
        _ => 0.0,
    }
}

/// Gram matrix `G[a][b] = <s_a|s_b>`.
pub fn gram_matrix(states: &[TfgkpState]) -> Result<Vec<Vec<Complex64>>> {
    states.iter().map(|a| states.iter().map(|b| a.inner_product(b)).collect::<Result<Vec<_>>>()).collect()
}

/// FWHM of the density peak nearest to `near`, by linear interpolation of
/// the half-maximum crossings.
pub fn fwhm_near(density: &GridFunction, near: f64) -> Option<f64> {
    let s = density.samples();
    let spec = density.spec();
    let i0 = ((near - spec.origin) / spec.step).round().clamp(0.0, (spec.len - 1) as f64) as usize;
    // climb to the local maximum
    let mut i = i0;
    loop {
        if i + 1 < s.len() && s[i + 1].re > s[i].re {
            i += 1;
        } else if i > 0 && s[i - 1].re > s[i].re {
            i -= 1;
        } else {
            break;
        }
    }
    // the true maximum generally lies between nodes
    let (mut a, mut b) = (spec.x(i.saturating_sub(1)), spec.x((i + 1).min(s.len() - 1)));
    for _ in 0..100 {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if density.interpolate(m1).re < density.interpolate(m2).re {
            a = m1;
        } else {
            b = m2;
        }
    }
    let half = 0.5 * density.interpolate(0.5 * (a + b)).re.max(s[i].re);
    let mut l = i;
    while l > 0 && s[l].re > half {
        l -= 1;
    }
    let mut r = i;
    while r + 1 < s.len() && s[r].re > half {
        r += 1;
    }
    if s[l].re > half || s[r].re > half {
        return None;
    }
    let crossing = |a: f64, b: f64| {
        // bisection on the interpolated density; f(a) and f(b) straddle half
        let (mut a, mut b) = (a, b);
        let fa_above = density.interpolate(a).re > half;
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if (density.interpolate(m).re > half) == fa_above {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    };
    let xl = crossing(spec.x(l), spec.x(l + 1));
    let xr = crossing(spec.x(r - 1), spec.x(r));
    Some(xr - xl)
}

/// Positions of local maxima above `rel` times the global maximum.
pub fn local_maxima(density: &GridFunction, rel: f64) -> Vec<f64> {
    let s = density.samples();
    let max = s.iter().map(|v| v.re).fold(0.0, f64::max);
    (1..s.len() - 1)
        .filter(|&i| s[i].re >= rel * max && s[i].re > s[i - 1].re && s[i].re >= s[i + 1].re)
        .map(|i| density.x(i))
        .collect()
}
