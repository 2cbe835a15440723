// Copyright 2026 TFGKP Contributors
// SPDX-License-Identifier: Apache-2.0

//! Passive, frequency-diagonal linear optics: beam splitters, optical
//! interleavers (OIs), delay lines and the OI-delay-OI phase gate.
//!
//! A [`ModeMap`] sends the creation operator of input port `q` at absolute
//! angular frequency `w` to `sum_p t_pq(w) a_p(w)`. Frequencies are never
//! mixed. Beam splitters use the symmetric convention
//! `[[sqrt(T), i sqrt(R)], [i sqrt(R), sqrt(T)]]`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::func::{AnalyticShape, AxisKind, GridFunction, TimeFrequencyFunction};
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Lines summed on either side of the nearest one when the OI peak shape is
/// not confined to a single period.
const OI_TAIL_LINES: i64 = 64;

/// Comb filter of an optical interleaver. Port `j` transmits
/// `I_j(w) = {g_I . [T_{j w_r/d}(C_{w_r}) * f_I]}(w_0 - w)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterleaverSpec {
    pub d: usize,
    pub omega_r: f64,
    pub omega_0: f64,
    /// `g_I`, evaluated at `w_0 - w`.
    pub envelope: AnalyticShape,
    /// `f_I`, one passband.
    pub peak: AnalyticShape,
}

impl InterleaverSpec {
    /// Flat envelope and rectangular passbands of half width `w_r / 2d`.
    pub fn ideal(d: usize, omega_r: f64, omega_0: f64) -> Result<Self> {
        let s = Self {
            d,
            omega_r,
            omega_0,
            envelope: AnalyticShape::flat(),
            peak: AnalyticShape::rect(omega_r / (2.0 * d.max(1) as f64)),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(crate::invalid("interleaver needs d >= 1"));
        }
        if !(self.omega_r > 0.0 && self.omega_r.is_finite()) {
            return Err(crate::invalid(format!("omega_r must be positive, got {}", self.omega_r)));
        }
        if !self.omega_0.is_finite() {
            return Err(crate::invalid("omega_0 must be finite"));
        }
        Ok(())
    }

    pub fn bin_spacing(&self) -> f64 {
        self.omega_r / self.d as f64
    }

    /// Half width of the passband support, if compact.
    pub fn passband_halfwidth(&self) -> Option<f64> {
        if !self.peak.is_compact_peak() {
            return None;
        }
        self.peak.support_hint().map(|(lo, hi)| lo.abs().max(hi.abs()))
    }

    /// Passbands of neighbouring ports overlap.
    pub fn passbands_overlap(&self) -> bool {
        match self.passband_halfwidth() {
            Some(h) => h > 0.5 * self.bin_spacing() * (1.0 + 1e-12),
            None => true,
        }
    }

    /// The "good OI" conditions: `g_I` periodic in `w_r` on the sampled
    /// lines and `f_I` vanishing beyond `w_r / 2`.
    pub fn is_good(&self, lines: i64) -> bool {
        let confined = self.passband_halfwidth().is_some_and(|h| h <= 0.5 * self.omega_r);
        let periodic = (-lines..lines).all(|n| {
            let x = n as f64 * self.omega_r;
            let a = self.envelope.eval(x);
            let b = self.envelope.eval(x + self.omega_r);
            (a - b).norm() <= 1e-6 * a.norm().max(b.norm()).max(1e-300)
        });
        confined && periodic
    }

    /// `I_k(w)` at absolute angular frequency `w`.
    pub fn transmission(&self, k: usize, omega: f64) -> Complex64 {
        let x = self.omega_0 - omega;
        let shift = (k % self.d) as f64 * self.bin_spacing();
        // line n of T_shift(C) sits at x = n w_r - shift
        let n0 = ((x + shift) / self.omega_r).round() as i64;
        let reach = if self.passband_halfwidth().is_some_and(|h| h <= 0.5 * self.omega_r) { 1 } else { OI_TAIL_LINES };
        let mut acc = ZERO;
        for n in n0 - reach..=n0 + reach {
            acc += self.peak.eval(x - (n as f64 * self.omega_r - shift));
        }
        self.envelope.eval(x) * acc
    }
}

/// Frequency response of one mode-map entry, evaluated at absolute angular
/// frequency.
#[derive(Debug, Clone, PartialEq)]
pub enum Transmission {
    Constant(Complex64),
    /// `exp(-i w tau)`.
    Delay(f64),
    /// `I_k(w)`, or its complex conjugate for the recombining direction.
    Interleaver {
        spec: Arc<InterleaverSpec>,
        k: usize,
        conjugate: bool,
    },
    Function(TimeFrequencyFunction),
    Product(Vec<Transmission>),
    Sum(Vec<Transmission>),
}

impl Transmission {
    pub fn eval(&self, omega: f64) -> Complex64 {
        match self {
            Transmission::Constant(c) => *c,
            Transmission::Delay(tau) => Complex64::from_polar(1.0, -omega * tau),
            Transmission::Interleaver { spec, k, conjugate } => {
                let t = spec.transmission(*k, omega);
                if *conjugate {
                    t.conj()
                } else {
                    t
                }
            }
            Transmission::Function(f) => f.eval(omega),
            Transmission::Product(ts) => ts.iter().map(|t| t.eval(omega)).product(),
            Transmission::Sum(ts) => ts.iter().map(|t| t.eval(omega)).sum(),
        }
    }

    fn is_zero(&self) -> bool {
        matches!(self, Transmission::Constant(c) if *c == ZERO)
    }

    fn as_constant(&self) -> Option<Complex64> {
        match self {
            Transmission::Constant(c) => Some(*c),
            _ => None,
        }
    }

    fn times(&self, other: &Transmission) -> Transmission {
        match (self, other) {
            (a, _) | (_, a) if a.is_zero() => Transmission::Constant(ZERO),
            (Transmission::Constant(a), Transmission::Constant(b)) => Transmission::Constant(a * b),
            (Transmission::Constant(a), t) | (t, Transmission::Constant(a)) if *a == ONE => t.clone(),
            (Transmission::Delay(a), Transmission::Delay(b)) => Transmission::Delay(a + b),
            (a, b) => Transmission::Product(vec![a.clone(), b.clone()]),
        }
    }

    fn sum(mut terms: Vec<Transmission>) -> Transmission {
        terms.retain(|t| !t.is_zero());
        if terms.iter().all(|t| t.as_constant().is_some()) {
            return Transmission::Constant(terms.iter().filter_map(Transmission::as_constant).sum());
        }
        if terms.len() == 1 {
            return terms.pop().unwrap();
        }
        Transmission::Sum(terms)
    }
}

/// Linear map on creation operators over (port x frequency).
#[derive(Debug, Clone, PartialEq)]
pub struct ModeMap {
    n_in: usize,
    n_out: usize,
    /// Row-major `(out, in)`.
    entries: Vec<Transmission>,
    /// Declared not unitary (e.g. a sub-block of a larger map).
    lossy: bool,
}

impl ModeMap {
    pub fn identity(n: usize) -> Self {
        let mut entries = vec![Transmission::Constant(ZERO); n * n];
        for p in 0..n {
            entries[p * n + p] = Transmission::Constant(ONE);
        }
        Self { n_in: n, n_out: n, entries, lossy: false }
    }

    pub fn from_constant(matrix: Vec<Vec<Complex64>>) -> Result<Self> {
        let n_out = matrix.len();
        let n_in = matrix.first().map_or(0, Vec::len);
        if n_out == 0 || n_in == 0 || matrix.iter().any(|r| r.len() != n_in) {
            return Err(crate::invalid("mode map matrix must be rectangular and non-empty"));
        }
        let entries = matrix.into_iter().flatten().map(Transmission::Constant).collect();
        Ok(Self { n_in, n_out, entries, lossy: false })
    }

    pub fn beam_splitter(reflectivity: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&reflectivity) {
            return Err(crate::invalid(format!("reflectivity must lie in [0, 1], got {reflectivity}")));
        }
        let t = Complex64::new((1.0 - reflectivity).sqrt(), 0.0);
        let r = Complex64::new(0.0, reflectivity.sqrt());
        Self::from_constant(vec![vec![t, r], vec![r, t]])
    }

    /// `d x d` map whose `(j + k mod d, j)` entry is `I_k`. In strict mode
    /// overlapping passbands are rejected.
    pub fn interleaver(spec: &InterleaverSpec, strict: bool) -> Result<Self> {
        Self::interleaver_impl(spec, strict, false)
    }

    /// Adjoint of [`ModeMap::interleaver`]: recombines the `d` ports.
    pub fn interleaver_inverse(spec: &InterleaverSpec, strict: bool) -> Result<Self> {
        Self::interleaver_impl(spec, strict, true)
    }

    fn interleaver_impl(spec: &InterleaverSpec, strict: bool, inverse: bool) -> Result<Self> {
        spec.validate()?;
        if strict && spec.passbands_overlap() {
            return Err(Error::Strict("interleaver passbands overlap".into()));
        }
        let d = spec.d;
        let shared = Arc::new(spec.clone());
        let mut entries = vec![Transmission::Constant(ZERO); d * d];
        for j in 0..d {
            for k in 0..d {
                let (out, inp) = if inverse { (j, (j + k) % d) } else { ((j + k) % d, j) };
                entries[out * d + inp] = Transmission::Interleaver { spec: shared.clone(), k, conjugate: inverse };
            }
        }
        Ok(Self { n_in: d, n_out: d, entries, lossy: false })
    }

    /// Single-port delay line, `exp(-i w dtau)`.
    pub fn delay(dtau: f64) -> Self {
        Self { n_in: 1, n_out: 1, entries: vec![Transmission::Delay(dtau)], lossy: false }
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn is_lossy(&self) -> bool {
        self.lossy
    }

    pub fn entry(&self, out: usize, inp: usize) -> &Transmission {
        &self.entries[out * self.n_in + inp]
    }

    pub fn matrix_at(&self, omega: f64) -> Vec<Vec<Complex64>> {
        (0..self.n_out).map(|p| (0..self.n_in).map(|q| self.entry(p, q).eval(omega)).collect()).collect()
    }

    /// This map followed by `next`.
    pub fn then(&self, next: &ModeMap) -> Result<ModeMap> {
        if next.n_in != self.n_out {
            return Err(crate::invalid(format!("cannot chain {} outputs into {} inputs", self.n_out, next.n_in)));
        }
        let mut entries = Vec::with_capacity(next.n_out * self.n_in);
        for p in 0..next.n_out {
            for q in 0..self.n_in {
                let terms = (0..self.n_out).map(|r| next.entry(p, r).times(self.entry(r, q))).collect();
                entries.push(Transmission::sum(terms));
            }
        }
        Ok(ModeMap { n_in: self.n_in, n_out: next.n_out, entries, lossy: self.lossy || next.lossy })
    }

    /// Places this square map on `ports` of an `n`-port identity.
    pub fn embed(&self, n: usize, ports: &[usize]) -> Result<ModeMap> {
        if self.n_in != self.n_out || ports.len() != self.n_in {
            return Err(crate::invalid("embedding needs a square map and one port per mode"));
        }
        for (i, &p) in ports.iter().enumerate() {
            if p >= n {
                return Err(Error::IndexOutOfRange { index: p, dim: n });
            }
            if ports[..i].contains(&p) {
                return Err(crate::invalid(format!("port {p} listed twice")));
            }
        }
        let mut out = ModeMap::identity(n);
        out.lossy = self.lossy;
        for (a, &p) in ports.iter().enumerate() {
            for (b, &q) in ports.iter().enumerate() {
                out.entries[p * n + q] = self.entry(a, b).clone();
            }
        }
        Ok(out)
    }

    /// `max |U^dag U - 1|` at one frequency.
    pub fn unitarity_defect(&self, omega: f64) -> f64 {
        let m = self.matrix_at(omega);
        let mut worst = if self.n_in == self.n_out { 0.0 } else { f64::INFINITY };
        for a in 0..self.n_in {
            for b in 0..self.n_in {
                let s: Complex64 = (0..self.n_out).map(|p| m[p][a].conj() * m[p][b]).sum();
                let want = if a == b { ONE } else { ZERO };
                worst = f64::max(worst, (s - want).norm());
            }
        }
        worst
    }

    /// Errors if the map is declared unitary but misses by more than `tol`
    /// on any of `omegas`.
    pub fn check_unitary(&self, omegas: &[f64], tol: f64) -> Result<()> {
        if self.lossy {
            return Ok(());
        }
        let defect = omegas.iter().map(|&w| self.unitarity_defect(w)).fold(0.0, f64::max);
        if defect > tol {
            return Err(Error::NonUnitary { defect });
        }
        Ok(())
    }

    /// Applies the map to a single photon whose spectral amplitude in input
    /// port `q` is `inputs[q]`, sampled over detuning from `omega_0`.
    pub fn apply_single_photon(&self, omega_0: f64, inputs: &[Option<GridFunction>]) -> Result<Vec<GridFunction>> {
        if inputs.len() != self.n_in {
            return Err(crate::invalid(format!("expected {} input ports, got {}", self.n_in, inputs.len())));
        }
        let first = inputs
            .iter()
            .flatten()
            .next()
            .ok_or_else(|| crate::invalid("at least one input port must carry the photon"))?;
        let spec = first.spec();
        for g in inputs.iter().flatten() {
            if g.axis() != AxisKind::AngularFrequency {
                return Err(Error::AxisMismatch { left: AxisKind::AngularFrequency, right: g.axis() });
            }
            if g.spec() != spec {
                return Err(crate::invalid("input amplitudes must share one grid"));
            }
        }
        let mut out = Vec::with_capacity(self.n_out);
        for p in 0..self.n_out {
            let samples = (0..spec.len)
                .map(|n| {
                    let w = omega_0 + spec.x(n);
                    inputs
                        .iter()
                        .enumerate()
                        .filter_map(|(q, g)| g.as_ref().map(|g| self.entry(p, q).eval(w) * g.samples()[n]))
                        .sum()
                })
                .collect();
            out.push(GridFunction::new(spec, AxisKind::AngularFrequency, samples)?);
        }
        Ok(out)
    }

    /// Matrix acting on frequency bin `bin` of a `d`-bin comb, evaluated on
    /// the bin's central line `w_0 + bin w_r / d`.
    pub fn bin_matrix(&self, omega_0: f64, omega_r: f64, d: usize, bin: usize) -> Vec<Vec<Complex64>> {
        self.matrix_at(omega_0 + bin as f64 * omega_r / d as f64)
    }

    fn restrict(&self, outs: &[usize], ins: &[usize]) -> ModeMap {
        let mut entries = Vec::with_capacity(outs.len() * ins.len());
        for &p in outs {
            for &q in ins {
                entries.push(self.entry(p, q).clone());
            }
        }
        let lossy = self.lossy || outs.len() < self.n_out || ins.len() < self.n_in;
        ModeMap { n_in: ins.len(), n_out: outs.len(), entries, lossy }
    }
}

/// The phase gate: a 1:2 OI, a delay on the bin-1 arm and a 2:1 OI.
///
/// Port 0 carries the qubit; port 1 is the unused arm. On the central lines
/// the action is `diag(1, exp(-i theta))` with `theta = w_0 dtau`. Angles
/// beyond `pi/2` need `|dtau| > pi / 2 w_0` and are realized by cascading
/// equal stages.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGate {
    pub theta: f64,
    pub omega_0: f64,
    pub omega_r: f64,
    pub stages: usize,
    pub stage_delay: f64,
    pub map: ModeMap,
}

impl PhaseGate {
    pub fn new(theta: f64, omega_0: f64, omega_r: f64, strict: bool) -> Result<Self> {
        if !theta.is_finite() || !(omega_0 > 0.0) || !(omega_r > 0.0) {
            return Err(crate::invalid("phase gate needs finite theta and positive omega_0, omega_r"));
        }
        let limit = FRAC_PI_2 * (1.0 + 1e-12);
        let stages = if theta.abs() <= limit {
            1
        } else if strict {
            return Err(Error::Strict(format!(
                "theta = {theta} needs a delay beyond pi / 2 omega_0; cascade gates instead"
            )));
        } else {
            (theta.abs() / FRAC_PI_2).ceil() as usize
        };
        let stage_delay = theta / (stages as f64 * omega_0);
        let oi = InterleaverSpec::ideal(2, omega_r, omega_0)?;
        let split = ModeMap::interleaver(&oi, true)?;
        let merge = ModeMap::interleaver_inverse(&oi, true)?;
        let arm = ModeMap::delay(stage_delay).embed(2, &[1])?;
        let stage = split.then(&arm)?.then(&merge)?;
        let mut map = ModeMap::identity(2);
        for _ in 0..stages {
            map = map.then(&stage)?;
        }
        Ok(Self { theta, omega_0, omega_r, stages, stage_delay, map })
    }

    /// Total delay on the bin-1 arm.
    pub fn delay(&self) -> f64 {
        self.stage_delay * self.stages as f64
    }

    /// The qubit-port block as a one-port (lossy) map.
    pub fn qubit_map(&self) -> ModeMap {
        self.map.restrict(&[0], &[0])
    }

    /// Largest deviation from `diag(1, exp(-i theta))` over comb lines
    /// `|n| <= lines` of both bins.
    pub fn line_phase_deviation(&self, lines: i64) -> f64 {
        let target1 = Complex64::from_polar(1.0, -self.theta);
        let mut worst = 0.0f64;
        for n in -lines..=lines {
            let w0 = self.omega_0 + n as f64 * self.omega_r;
            let w1 = w0 + 0.5 * self.omega_r;
            worst = worst.max((self.map.entry(0, 0).eval(w0) - ONE).norm());
            worst = worst.max((self.map.entry(0, 0).eval(w1) - target1).norm());
        }
        worst
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t - 2.0 * PI
    } else {
        t
    }
}

/// Shared optical parameters for building circuit elements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalContext {
    pub d: usize,
    pub omega_r: f64,
    pub omega_0: f64,
}

fn half() -> f64 {
    0.5
}

/// One element of a circuit file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ElementSpec {
    BeamSplitter {
        ports: [usize; 2],
        #[serde(default = "half")]
        reflectivity: f64,
    },
    /// Ideal `d:d` OI; `ports[j]` is the `j`-th OI port.
    Interleaver {
        ports: Vec<usize>,
        #[serde(default)]
        inverse: bool,
    },
    Delay {
        port: usize,
        tau_ps: f64,
    },
    /// OI-delay-OI phase gate on the qubit carried by `port`.
    PhaseGate {
        port: usize,
        theta: f64,
    },
}

impl ElementSpec {
    pub fn ports(&self) -> Vec<usize> {
        match self {
            ElementSpec::BeamSplitter { ports, .. } => ports.to_vec(),
            ElementSpec::Interleaver { ports, .. } => ports.clone(),
            ElementSpec::Delay { port, .. } | ElementSpec::PhaseGate { port, .. } => vec![*port],
        }
    }

    /// Full `n_ports` map at the given optical parameters.
    pub fn mode_map(&self, ctx: &OpticalContext, n_ports: usize) -> Result<ModeMap> {
        let (local, ports) = match self {
            ElementSpec::BeamSplitter { ports, reflectivity } => {
                (ModeMap::beam_splitter(*reflectivity)?, ports.to_vec())
            }
            ElementSpec::Interleaver { ports, inverse } => {
                if ports.len() != ctx.d {
                    return Err(Error::Circuit(format!("interleaver needs {} ports, got {}", ctx.d, ports.len())));
                }
                let spec = InterleaverSpec::ideal(ctx.d, ctx.omega_r, ctx.omega_0)?;
                let m = if *inverse {
                    ModeMap::interleaver_inverse(&spec, true)?
                } else {
                    ModeMap::interleaver(&spec, true)?
                };
                (m, ports.clone())
            }
            ElementSpec::Delay { port, tau_ps } => (ModeMap::delay(*tau_ps), vec![*port]),
            ElementSpec::PhaseGate { port, theta } => {
                if ctx.d != 2 {
                    return Err(Error::Unsupported("phase gate is defined for d = 2".into()));
                }
                (PhaseGate::new(*theta, ctx.omega_0, ctx.omega_r, false)?.qubit_map(), vec![*port])
            }
        };
        local.embed(n_ports, &ports)
    }
}
