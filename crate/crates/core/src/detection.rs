// Copyright 2026 TFGKP Contributors
// SPDX-License-Identifier: Apache-2.0

//! Finite-resolution time and frequency detectors, shot sampling and
//! decoding of raw detection values to qudit outcomes.

use std::io::Write;

use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Cauchy, Distribution, Exp, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::elements::InterleaverSpec;
use crate::error_budget::fwhm_to_sigma;
use crate::func::{AnalyticShape, GridFunction, ShapeKind};
use crate::states::{BasisLabel, TfgkpState, FLAT_ENVELOPE_HALF_LINES};
use crate::{Error, Result};

/// Shots drawn from one RNG stream. Chunks are independent streams of the
/// same seed, so results do not depend on the thread count.
const CHUNK: usize = 8192;
/// Points used to tabulate profiles that have no closed-form sampler.
const TABLE_POINTS: usize = 8192;
/// Relative line weight below which a line is dropped.
const LINE_CUT: f64 = 1e-16;
/// Give up on an OI bank after this many consecutive lost photons.
const MAX_LOST: usize = 1_000_000;

/// What the detector resolves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DetectorKind {
    /// Arrival time with Gaussian jitter of FWHM `jitter_fwhm` (ps).
    TimeResolving { jitter_fwhm: f64 },
    /// Frequency with a Gaussian resolution of FWHM `resolution_fwhm`
    /// (rad/ps), zero by default.
    FrequencyResolving {
        #[serde(default)]
        resolution_fwhm: f64,
    },
    /// An interleaver followed by one bucket detector per port.
    OiBank { interleaver: InterleaverSpec },
}

/// How the photon's detection density is modelled.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineModel {
    /// Each comb line (or temporal peak) is an isolated profile; lines are
    /// picked by their envelope weight. This is the picture behind the
    /// closed-form error probabilities.
    #[default]
    Isolated,
    /// The full interfering density of the state, tabulated on its grid.
    Coherent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorSpec {
    #[serde(flatten)]
    pub kind: DetectorKind,
    #[serde(default)]
    pub line_model: LineModel,
}

impl DetectorSpec {
    pub fn time(jitter_fwhm: f64) -> Self {
        Self { kind: DetectorKind::TimeResolving { jitter_fwhm }, line_model: LineModel::Isolated }
    }

    pub fn frequency(resolution_fwhm: f64) -> Self {
        Self { kind: DetectorKind::FrequencyResolving { resolution_fwhm }, line_model: LineModel::Isolated }
    }

    pub fn oi_bank(interleaver: InterleaverSpec) -> Self {
        Self { kind: DetectorKind::OiBank { interleaver }, line_model: LineModel::Isolated }
    }

    pub fn with_line_model(mut self, m: LineModel) -> Self {
        self.line_model = m;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            DetectorKind::TimeResolving { jitter_fwhm: w }
            | DetectorKind::FrequencyResolving { resolution_fwhm: w } => {
                if !(*w >= 0.0 && w.is_finite()) {
                    return Err(crate::invalid(format!("detector FWHM must be finite and >= 0, got {w}")));
                }
                Ok(())
            }
            DetectorKind::OiBank { interleaver } => interleaver.validate(),
        }
    }

    pub fn is_time(&self) -> bool {
        matches!(self.kind, DetectorKind::TimeResolving { .. })
    }
}

/// One detected photon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    /// Arrival time (ps) or absolute angular frequency (rad/ps).
    pub raw_value: f64,
    pub decoded_bin: usize,
    /// Detector port; the OI output for a bank, otherwise 0.
    pub port: usize,
    /// Index of the period the raw value fell into.
    pub fold_index: i64,
}

/// Folds `offset` (relative to the bin-0 center) by `period` and snaps it to
/// the nearest of `d` bins. Boundaries sit at midpoints; ties go to the
/// lower bin index.
pub fn decode(offset: f64, period: f64, d: usize) -> (i64, usize) {
    let u = offset / (period / d as f64) - 0.5;
    let mut b = u.ceil() as i64;
    let d = d as i64;
    // a tie between bin d-1 and bin 0 of the neighbouring period goes to 0
    if d > 1 && u == b as f64 && b.rem_euclid(d) == d - 1 {
        b += 1;
    }
    (b.div_euclid(d), b.rem_euclid(d) as usize)
}

/// Histogram of decoded bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub counts: Vec<u64>,
    pub shots: u64,
    /// Photons that left an OI bank through no port, redrawn.
    pub lost: u64,
}

impl Histogram {
    pub fn probabilities(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64 / self.shots as f64).collect()
    }

    /// Fraction of shots not decoded as `bin`, and its binomial standard
    /// error.
    pub fn error_rate(&self, bin: usize) -> (f64, f64) {
        let p = 1.0 - self.counts[bin] as f64 / self.shots as f64;
        (p, (p * (1.0 - p) / self.shots as f64).sqrt())
    }
}

/// Sampler for `|s(x)|^2 / ||s||^2` of one analytic profile.
#[derive(Debug, Clone)]
enum Profile {
    Point,
    Normal(Normal<f64>),
    Cauchy(Cauchy<f64>),
    Exp(Exp<f64>),
    Uniform(f64),
    Table(Table),
}

/// Piecewise-linear density on a uniform grid.
#[derive(Debug, Clone)]
struct Table {
    origin: f64,
    step: f64,
    pdf: Vec<f64>,
    cdf: Vec<f64>,
}

impl Table {
    fn new(origin: f64, step: f64, pdf: Vec<f64>) -> Result<Self> {
        let mut cdf = Vec::with_capacity(pdf.len());
        let mut acc = 0.0;
        cdf.push(0.0);
        for w in pdf.windows(2) {
            acc += 0.5 * (w[0] + w[1]) * step;
            cdf.push(acc);
        }
        if !(acc > 0.0 && acc.is_finite()) {
            return Err(Error::NotNormalizable("density has no mass on its grid".into()));
        }
        Ok(Self { origin, step, pdf, cdf })
    }

    fn from_grid(g: &GridFunction) -> Result<Self> {
        Self::new(g.origin(), g.step(), g.samples().iter().map(|z| z.re.max(0.0)).collect())
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        let total = *self.cdf.last().unwrap();
        let t = rng.random::<f64>() * total;
        let i = self.cdf.partition_point(|&c| c <= t).clamp(1, self.cdf.len() - 1) - 1;
        let r = t - self.cdf[i];
        let (p0, p1) = (self.pdf[i], self.pdf[i + 1]);
        // solve p0 s + (p1 - p0) s^2 / 2h = r
        let a = (p1 - p0) / (2.0 * self.step);
        let disc = (p0 * p0 + 4.0 * a * r).max(0.0);
        let s = if p0 + disc.sqrt() > 0.0 { 2.0 * r / (p0 + disc.sqrt()) } else { 0.5 * self.step };
        self.origin + i as f64 * self.step + s.clamp(0.0, self.step)
    }
}

impl Profile {
    fn of(shape: &AnalyticShape) -> Result<(Self, f64)> {
        let sign = if shape.mirrored { -1.0 } else { 1.0 };
        let p = match &shape.kind {
            ShapeKind::Dirac => Profile::Point,
            // |f_G(x; s)|^2 is a Gaussian of std s / sqrt2
            ShapeKind::Gaussian { sigma } => Profile::Normal(Normal::new(0.0, sigma / 2f64.sqrt()).map_err(dist_err)?),
            ShapeKind::Lorentzian { gamma } => Profile::Cauchy(Cauchy::new(0.0, *gamma).map_err(dist_err)?),
            ShapeKind::CausalExp { gamma } => Profile::Exp(Exp::new(2.0 * gamma).map_err(dist_err)?),
            ShapeKind::Rect { halfwidth } => Profile::Uniform(*halfwidth),
            ShapeKind::Flat => return Err(Error::NotNormalizable("flat profile cannot be sampled".into())),
            ShapeKind::Sinc { .. } | ShapeKind::Custom(_) => {
                let base = AnalyticShape { center: 0.0, mirrored: false, modulation: 0.0, ..shape.clone() };
                let (lo, hi) =
                    base.support_hint().ok_or_else(|| Error::NotNormalizable("profile without support".into()))?;
                let step = (hi - lo) / (TABLE_POINTS - 1) as f64;
                let pdf = (0..TABLE_POINTS).map(|i| base.eval(lo + i as f64 * step).norm_sqr()).collect();
                Profile::Table(Table::new(lo, step, pdf)?)
            }
        };
        Ok((p, sign))
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            Profile::Point => 0.0,
            Profile::Normal(n) => n.sample(rng),
            Profile::Cauchy(c) => c.sample(rng),
            Profile::Exp(e) => e.sample(rng),
            Profile::Uniform(h) => (2.0 * rng.random::<f64>() - 1.0) * h,
            Profile::Table(t) => t.sample(rng),
        }
    }
}

fn dist_err(e: impl std::fmt::Display) -> Error {
    crate::invalid(format!("bad sampling width: {e}"))
}

/// Lines at known positions with an isolated profile around each.
#[derive(Debug, Clone)]
struct LineSet {
    positions: Vec<f64>,
    pick: WeightedIndex<f64>,
    profile: Profile,
    center: f64,
    sign: f64,
}

impl LineSet {
    fn new(lines: Vec<(f64, f64)>, shape: &AnalyticShape) -> Result<Self> {
        let top = lines.iter().map(|l| l.1).fold(0.0, f64::max);
        let kept: Vec<_> = lines.into_iter().filter(|l| l.1 > LINE_CUT * top).collect();
        if kept.is_empty() {
            return Err(Error::NotNormalizable("no line carries weight".into()));
        }
        let pick = WeightedIndex::new(kept.iter().map(|l| l.1)).map_err(dist_err)?;
        let (profile, sign) = Profile::of(shape)?;
        Ok(Self { positions: kept.iter().map(|l| l.0).collect(), pick, profile, center: shape.center, sign })
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        let x = self.positions[self.pick.sample(rng)];
        x + self.sign * (self.center + self.profile.sample(rng))
    }
}

#[derive(Debug, Clone)]
enum Source {
    Lines(LineSet),
    Density(Table),
}

impl Source {
    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            Source::Lines(l) => l.sample(rng),
            Source::Density(t) => t.sample(rng),
        }
    }
}

fn line_range(weight: &AnalyticShape, period: f64, offset: f64) -> (i64, i64) {
    match weight.support_hint() {
        Some((lo, hi)) if !weight.is_dirac() => {
            (((lo - offset) / period).floor() as i64, ((hi - offset) / period).ceil() as i64)
        }
        _ => (-FLAT_ENVELOPE_HALF_LINES, FLAT_ENVELOPE_HALF_LINES),
    }
}

/// Comb lines of the state over detuning `omega - omega_0`.
fn spectral_lines(state: &TfgkpState) -> Result<LineSet> {
    let desc = state.descriptor();
    let (om, d) = (desc.omega_r, desc.d);
    let env = desc.envelope.reflect();
    let (period, offset) = match desc.basis {
        BasisLabel::Frequency(k) => (om, k as f64 * om / d as f64),
        // all d offsets with equal magnitude
        BasisLabel::Time(_) => (om / d as f64, 0.0),
    };
    let (n0, n1) = line_range(&env, period, offset);
    let lines = (n0..=n1)
        .map(|n| {
            let x = offset + n as f64 * period;
            let w = if env.is_flat() { 1.0 } else { env.eval(x).norm_sqr() };
            (x, w)
        })
        .collect();
    LineSet::new(lines, &desc.peak.reflect())
}

/// Temporal peaks of the state, relative to `tau_0`.
fn temporal_peaks(state: &TfgkpState) -> Result<LineSet> {
    let desc = state.descriptor();
    let (tau_r, d) = (state.tau_r(), desc.d);
    let weight = desc.peak.reflect().fourier();
    let peak = desc.envelope.reflect().fourier();
    let (period, offset) = match desc.basis {
        BasisLabel::Time(j) => (tau_r, j as f64 * tau_r / d as f64),
        BasisLabel::Frequency(_) => (tau_r / d as f64, 0.0),
    };
    let (n0, n1) = line_range(&weight, period, offset);
    let lines = (n0..=n1)
        .map(|n| {
            let t = offset + n as f64 * period;
            let w = if weight.is_flat() { 1.0 } else { weight.eval(t).norm_sqr() };
            (t, w)
        })
        .collect();
    LineSet::new(lines, &peak)
}

/// A detector prepared for one state: every shot is an independent draw.
#[derive(Debug, Clone)]
pub struct Detector {
    spec: DetectorSpec,
    source: Source,
    /// Gaussian smearing added to every raw value.
    smear: Option<Normal<f64>>,
    origin: f64,
    period: f64,
    d: usize,
    warning: Option<String>,
}

impl Detector {
    pub fn new(state: &TfgkpState, spec: &DetectorSpec) -> Result<Self> {
        spec.validate()?;
        let desc = state.descriptor();
        let d = desc.d;
        let time = spec.is_time();
        if spec.line_model == LineModel::Isolated && desc.dispersion.is_some() && time {
            return Err(Error::Unsupported(
                "isolated-peak model ignores dispersion; use the coherent line model".into(),
            ));
        }
        let source = match (spec.line_model, time) {
            (LineModel::Isolated, true) => Source::Lines(temporal_peaks(state)?),
            (LineModel::Isolated, false) => Source::Lines(spectral_lines(state)?),
            (LineModel::Coherent, true) => {
                let g = state.temporal_density(None)?;
                let t = Table::from_grid(&g)?;
                Source::Density(Table { origin: t.origin - desc.tau_0, ..t })
            }
            (LineModel::Coherent, false) => Source::Density(Table::from_grid(&state.spectral_density(None)?)?),
        };
        let (fwhm, origin, period) = match &spec.kind {
            DetectorKind::TimeResolving { jitter_fwhm } => (*jitter_fwhm, desc.tau_0, state.tau_r()),
            DetectorKind::FrequencyResolving { resolution_fwhm } => (*resolution_fwhm, desc.omega_0, desc.omega_r),
            DetectorKind::OiBank { interleaver } => {
                if interleaver.d != d || (interleaver.omega_r - desc.omega_r).abs() > 1e-12 * desc.omega_r {
                    return Err(crate::invalid("interleaver and state disagree on d or omega_r"));
                }
                (0.0, desc.omega_0, desc.omega_r)
            }
        };
        let smear = if fwhm > 0.0 { Some(Normal::new(0.0, fwhm_to_sigma(fwhm)).map_err(dist_err)?) } else { None };
        let warning = if time {
            let bin = state.tau_r() / d as f64;
            let w = crate::states::intensity_fwhm(&desc.envelope.reflect().fourier()).unwrap_or(0.0);
            (w + fwhm > 0.5 * bin).then(|| format!("temporal peaks ({w:.3e} ps) plus jitter exceed half a time bin"))
        } else {
            state.width_warning()
        };
        Ok(Self { spec: spec.clone(), source, smear, origin, period, d, warning })
    }

    /// Set when bins overlap enough that nearest-bin decoding is unreliable.
    pub fn warning(&self) -> Option<&str> {
        self.warning.as_deref()
    }

    fn decode_raw(&self, raw: f64) -> (i64, usize) {
        decode(raw - self.origin, self.period, self.d)
    }

    /// One shot, plus the photons lost before it in an OI bank.
    fn shot<R: Rng>(&self, rng: &mut R) -> Result<(DetectionRecord, u64)> {
        match &self.spec.kind {
            DetectorKind::OiBank { interleaver } => {
                for lost in 0..MAX_LOST {
                    let x = self.source.sample(rng);
                    let omega = self.origin + x;
                    let mut u = rng.random::<f64>();
                    for k in 0..self.d {
                        let p = interleaver.transmission(k, omega).norm_sqr();
                        if u < p {
                            let (fold, _) = self.decode_raw(omega);
                            return Ok((
                                DetectionRecord { raw_value: omega, decoded_bin: k, port: k, fold_index: fold },
                                lost as u64,
                            ));
                        }
                        u -= p;
                    }
                }
                Err(Error::Assertion("interleaver transmits almost nothing".into()))
            }
            _ => {
                let mut raw = self.origin + self.source.sample(rng);
                if let Some(n) = &self.smear {
                    raw += n.sample(rng);
                }
                let (fold, bin) = self.decode_raw(raw);
                Ok((DetectionRecord { raw_value: raw, decoded_bin: bin, port: 0, fold_index: fold }, 0))
            }
        }
    }

    /// `n_shots` records and the number of lost photons. Deterministic for a
    /// given seed.
    pub fn sample(&self, n_shots: usize, seed: u64) -> Result<(Vec<DetectionRecord>, u64)> {
        let chunks = n_shots.div_ceil(CHUNK);
        let parts: Vec<Result<(Vec<DetectionRecord>, u64)>> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(c as u64);
                let n = CHUNK.min(n_shots - c * CHUNK);
                let mut out = Vec::with_capacity(n);
                let mut lost = 0;
                for _ in 0..n {
                    let (r, l) = self.shot(&mut rng)?;
                    out.push(r);
                    lost += l;
                }
                Ok((out, lost))
            })
            .collect();
        let mut records = Vec::with_capacity(n_shots);
        let mut lost = 0;
        for p in parts {
            let (r, l) = p?;
            records.extend(r);
            lost += l;
        }
        Ok((records, lost))
    }

    pub fn statistics(&self, n_shots: usize, seed: u64) -> Result<Histogram> {
        if n_shots == 0 {
            return Err(crate::invalid("need at least one shot"));
        }
        let (records, lost) = self.sample(n_shots, seed)?;
        let mut counts = vec![0u64; self.d];
        for r in &records {
            counts[r.decoded_bin] += 1;
        }
        Ok(Histogram { counts, shots: n_shots as u64, lost })
    }
}

/// One time-resolved detection.
pub fn detect_time(state: &TfgkpState, spec: &DetectorSpec, seed: u64) -> Result<DetectionRecord> {
    if !spec.is_time() {
        return Err(crate::invalid("detect_time needs a time-resolving detector"));
    }
    Ok(Detector::new(state, spec)?.sample(1, seed)?.0[0])
}

/// One frequency-resolved (or OI-bank) detection.
pub fn detect_frequency(state: &TfgkpState, spec: &DetectorSpec, seed: u64) -> Result<DetectionRecord> {
    if spec.is_time() {
        return Err(crate::invalid("detect_frequency needs a frequency-resolving detector or an OI bank"));
    }
    Ok(Detector::new(state, spec)?.sample(1, seed)?.0[0])
}

pub fn measurement_statistics(state: &TfgkpState, spec: &DetectorSpec, n_shots: usize, seed: u64) -> Result<Histogram> {
    Detector::new(state, spec)?.statistics(n_shots, seed)
}

/// Writes `shot,port,raw_value,fold_index,decoded_bin` rows.
pub fn write_records_csv<W: Write>(w: W, records: &[DetectionRecord]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["shot", "port", "raw_value", "fold_index", "decoded_bin"])?;
    for (i, r) in records.iter().enumerate() {
        out.write_record([
            i.to_string(),
            r.port.to_string(),
            format!("{:.12e}", r.raw_value),
            r.fold_index.to_string(),
            r.decoded_bin.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
