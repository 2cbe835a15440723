// Copyright 2026 TFGKP Contributors
// SPDX-License-Identifier: Apache-2.0

//! Circuit files, detector outcomes and heralded runs.
//!
//! A run evolves the input photons through bin-diagonal elements, expands
//! every detector port in its measurement basis and groups the result by
//! outcome. Partial distinguishability is modelled by a second run in which
//! every photon carries its own label; the two are mixed at the probability
//! level with weights `V` and `1 - V`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scalar::{Amplitude, Q};
use super::state::{factorial, sector_overlap, FockState, ModeLayout, Occupation};
use crate::elements::{ElementSpec, OpticalContext};
use crate::{Error, Result};

const MAX_PHOTONS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QubitState {
    Zero,
    One,
    Plus,
    Minus,
    /// `(|0> + i|1>) / sqrt2`
    PlusI,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InputSpec {
    Photon {
        port: usize,
        bin: usize,
    },
    Qubit {
        port: usize,
        state: QubitState,
    },
    /// `(|00> + |11>) / sqrt2`
    Bell {
        ports: [usize; 2],
    },
    /// `(|0+> + |1->) / sqrt2`
    Cluster2 {
        ports: [usize; 2],
    },
}

impl InputSpec {
    pub fn ports(&self) -> Vec<usize> {
        match self {
            InputSpec::Photon { port, .. } | InputSpec::Qubit { port, .. } => vec![*port],
            InputSpec::Bell { ports } | InputSpec::Cluster2 { ports } => ports.to_vec(),
        }
    }

    pub fn photons(&self) -> usize {
        self.ports().len()
    }

    fn build<A: Amplitude>(&self, layout: ModeLayout, label: &mut usize, distinct: bool) -> Result<FockState<A>> {
        let mut next = || {
            let l = *label;
            if distinct {
                *label += 1;
            }
            l
        };
        let h = A::inv_sqrt2();
        let i = A::from_c64(Complex64::i())?;
        Ok(match self {
            InputSpec::Photon { port, bin } => photon(layout, next(), *port, &[(*bin, A::one())]),
            InputSpec::Qubit { port, state } => {
                let amps = match state {
                    QubitState::Zero => vec![(0, A::one())],
                    QubitState::One => vec![(1, A::one())],
                    QubitState::Plus => vec![(0, h.clone()), (1, h)],
                    QubitState::Minus => vec![(0, h.clone()), (1, -h)],
                    QubitState::PlusI => vec![(0, h.clone()), (1, h * i)],
                };
                photon(layout, next(), *port, &amps)
            }
            InputSpec::Bell { ports: [p, q] } => {
                let (lp, lq) = (next(), next());
                let zero =
                    photon(layout, lp, *p, &[(0, h.clone())]).product(&photon(layout, lq, *q, &[(0, A::one())]))?;
                let one = photon(layout, lp, *p, &[(1, h)]).product(&photon(layout, lq, *q, &[(1, A::one())]))?;
                zero.add(&one)
            }
            InputSpec::Cluster2 { ports: [p, q] } => {
                let (lp, lq) = (next(), next());
                let plus = photon(layout, lq, *q, &[(0, h.clone()), (1, h.clone())]);
                let minus = photon(layout, lq, *q, &[(0, h.clone()), (1, -h.clone())]);
                let zero = photon(layout, lp, *p, &[(0, h.clone())]).product(&plus)?;
                let one = photon(layout, lp, *p, &[(1, h)]).product(&minus)?;
                zero.add(&one)
            }
        })
    }
}

/// One photon on `port` with amplitude `amps[k].1` in bin `amps[k].0`.
pub fn photon<A: Amplitude>(layout: ModeLayout, label: usize, port: usize, amps: &[(usize, A)]) -> FockState<A> {
    let mut s = FockState::zero(layout);
    for (bin, a) in amps {
        let mut occ = vec![0u8; layout.len()];
        occ[layout.index(label, port, *bin)] = 1;
        s.add_term(occ, a.clone());
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    /// Time-resolving detection: the `X`-like basis.
    Time,
    /// Frequency-resolving detection: the computational basis.
    Frequency,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectorPlacement {
    pub port: usize,
    pub basis: Basis,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distinct {
    #[default]
    None,
    /// No two detected photons share a (detector, bin) outcome.
    Modes,
    /// No two detected photons share a bin outcome, on any detector.
    Bins,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Herald {
    pub photons: usize,
    #[serde(default)]
    pub distinct: Distinct,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_detector: Option<Vec<usize>>,
}

/// Detected photon counts, `key[detector][bin]`.
pub type OutcomeKey = Vec<Vec<u8>>;

impl Herald {
    pub fn accepts(&self, key: &OutcomeKey) -> bool {
        let total: usize = key.iter().flatten().map(|&n| n as usize).sum();
        if total != self.photons {
            return false;
        }
        if let Some(per) = &self.per_detector {
            if per.len() != key.len()
                || key.iter().zip(per).any(|(row, &n)| row.iter().map(|&x| x as usize).sum::<usize>() != n)
            {
                return false;
            }
        }
        match self.distinct {
            Distinct::None => true,
            Distinct::Modes => key.iter().flatten().all(|&n| n <= 1),
            Distinct::Bins => bin_totals(key).iter().all(|&n| n <= 1),
        }
    }
}

fn bin_totals(key: &OutcomeKey) -> Vec<usize> {
    let d = key.first().map_or(0, Vec::len);
    (0..d).map(|b| key.iter().map(|row| row[b] as usize).sum()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Condition {
    /// Every detected photon reports the same bin.
    SameBin,
    /// No bin is reported twice.
    DifferentBins,
    Counts {
        counts: OutcomeKey,
    },
}

impl Condition {
    pub fn matches(&self, key: &OutcomeKey) -> bool {
        match self {
            Condition::SameBin => bin_totals(key).iter().filter(|&&n| n > 0).count() == 1,
            Condition::DifferentBins => bin_totals(key).iter().all(|&n| n <= 1),
            Condition::Counts { counts } => counts == key,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedForward {
    pub when: Condition,
    pub apply: Vec<ElementSpec>,
    pub label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetState {
    Bell,
    Ghz,
    LinearCluster,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Target {
    pub ports: Vec<usize>,
    pub state: TargetState,
    /// Positions in `ports` that carry an extra Hadamard.
    #[serde(default)]
    pub hadamard: Vec<usize>,
}

impl Target {
    /// Qubit amplitudes indexed with position 0 as the most significant bit.
    pub fn amplitudes<A: Amplitude>(&self) -> Result<Vec<A>> {
        let n = self.ports.len();
        if n < 2 || (self.state == TargetState::Bell && n != 2) {
            return Err(Error::Circuit(format!("{:?} target on {n} qubits", self.state)));
        }
        let h = A::inv_sqrt2();
        let mut amps = vec![A::zero(); 1 << n];
        match self.state {
            TargetState::Bell | TargetState::Ghz => {
                amps[0] = h.clone();
                amps[(1 << n) - 1] = h.clone();
            }
            TargetState::LinearCluster => {
                let mut scale = A::one();
                for _ in 0..n {
                    scale = scale * h.clone();
                }
                for (x, a) in amps.iter_mut().enumerate() {
                    let bit = |i: usize| (x >> (n - 1 - i)) & 1;
                    let parity = (0..n - 1).map(|i| bit(i) & bit(i + 1)).sum::<usize>() % 2;
                    *a = if parity == 0 { scale.clone() } else { -scale.clone() };
                }
            }
        }
        for &pos in &self.hadamard {
            if pos >= n {
                return Err(Error::Circuit(format!("hadamard position {pos} outside the target")));
            }
            let mask = 1 << (n - 1 - pos);
            let old = amps.clone();
            for x in 0..amps.len() {
                let (a0, a1) = (old[x & !mask].clone(), old[x | mask].clone());
                amps[x] = if x & mask == 0 { h.clone() * (a0 + a1) } else { h.clone() * (a0 - a1) };
            }
        }
        Ok(amps)
    }

    /// The target as an unlabeled state, one photon per target port.
    pub fn build<A: Amplitude>(&self, n_ports: usize, d: usize) -> Result<FockState<A>> {
        let layout = ModeLayout::new(n_ports, d, 1)?;
        let n = self.ports.len();
        let mut s = FockState::zero(layout);
        for (x, a) in self.amplitudes::<A>()?.into_iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let mut occ = vec![0u8; layout.len()];
            for (i, &p) in self.ports.iter().enumerate() {
                occ[layout.index(0, p, (x >> (n - 1 - i)) & 1)] += 1;
            }
            s.add_term(occ, a);
        }
        Ok(s)
    }
}

/// Expected values at unit visibility; runs with `V < 1` skip them.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expect {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub success: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feed_forward_fraction: Option<String>,
    /// Lower bound on the worst success-branch fidelity, usually `"1"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub n_ports: usize,
    pub d: usize,
    /// Optical parameters for the float path; element maps are then
    /// evaluated on the central comb line of each bin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optics: Option<OpticalContext>,
    pub inputs: Vec<InputSpec>,
    #[serde(default)]
    pub elements: Vec<ElementSpec>,
    pub detectors: Vec<DetectorPlacement>,
    pub herald: Herald,
    #[serde(default)]
    pub feed_forward: Vec<FeedForward>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Target>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<Expect>,
}

fn check_ports(what: &str, ports: &[usize], n_ports: usize) -> Result<()> {
    let set: BTreeSet<_> = ports.iter().collect();
    if set.len() != ports.len() {
        return Err(Error::Circuit(format!("{what} repeats a port: {ports:?}")));
    }
    if let Some(p) = ports.iter().find(|&&p| p >= n_ports) {
        return Err(Error::Circuit(format!("{what} uses port {p} of {n_ports}")));
    }
    Ok(())
}

impl Circuit {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: Circuit = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn photons(&self) -> usize {
        self.inputs.iter().map(InputSpec::photons).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_ports == 0 || self.d < 2 {
            return Err(Error::Circuit("need at least one port and two bins".into()));
        }
        let n = self.photons();
        if n == 0 || n > MAX_PHOTONS {
            return Err(Error::Circuit(format!("{n} photons; supported range is 1..={MAX_PHOTONS}")));
        }
        for inp in &self.inputs {
            check_ports("input", &inp.ports(), self.n_ports)?;
            if let InputSpec::Photon { bin, .. } = inp {
                if *bin >= self.d {
                    return Err(Error::Circuit(format!("bin {bin} of {}", self.d)));
                }
            }
        }
        let elements = self.elements.iter().chain(self.feed_forward.iter().flat_map(|f| &f.apply));
        for el in elements {
            check_ports("element", &el.ports(), self.n_ports)?;
            if let ElementSpec::Interleaver { ports, .. } = el {
                if ports.len() != self.d {
                    return Err(Error::Circuit(format!("interleaver needs {} ports, got {}", self.d, ports.len())));
                }
            }
        }
        let det: Vec<usize> = self.detectors.iter().map(|x| x.port).collect();
        check_ports("detectors", &det, self.n_ports)?;
        if let Some(per) = &self.herald.per_detector {
            if per.len() != det.len() {
                return Err(Error::Circuit("per_detector needs one count per detector".into()));
            }
        }
        for f in &self.feed_forward {
            if let Condition::Counts { counts } = &f.when {
                if counts.len() != det.len() || counts.iter().any(|r| r.len() != self.d) {
                    return Err(Error::Circuit(format!("feed-forward '{}' has malformed counts", f.label)));
                }
            }
        }
        if let Some(t) = &self.target {
            check_ports("target", &t.ports, self.n_ports)?;
            if t.ports.iter().any(|p| det.contains(p)) {
                return Err(Error::Circuit("target port is consumed by a detector".into()));
            }
            if self.d != 2 {
                return Err(Error::Unsupported("targets are qubit states".into()));
            }
            t.amplitudes::<Complex64>()?;
        }
        Ok(())
    }

    /// Input state after all elements; `distinguishable` gives every photon
    /// its own label.
    pub fn evolve<A: Amplitude>(&self, distinguishable: bool) -> Result<FockState<A>> {
        let labels = if distinguishable { self.photons() } else { 1 };
        let layout = ModeLayout::new(self.n_ports, self.d, labels)?;
        let mut s = FockState::vacuum(layout);
        let mut label = 0;
        for inp in &self.inputs {
            s = s.product(&inp.build(layout, &mut label, distinguishable)?)?;
        }
        for el in &self.elements {
            s = apply_element(&s, el, self.optics.as_ref())?;
        }
        Ok(s)
    }
}

/// Ideal per-bin port matrices `m[bin][out][in]` of an element.
pub fn ideal_matrices<A: Amplitude>(el: &ElementSpec, n_ports: usize, d: usize) -> Result<Vec<Vec<Vec<A>>>> {
    let identity: Vec<Vec<A>> =
        (0..n_ports).map(|r| (0..n_ports).map(|c| if r == c { A::one() } else { A::zero() }).collect()).collect();
    let mut m = vec![identity; d];
    match el {
        ElementSpec::BeamSplitter { ports: [p, q], reflectivity } => {
            let r = Q::approximate_float(*reflectivity)
                .filter(|_| (0.0..=1.0).contains(reflectivity))
                .ok_or_else(|| crate::invalid(format!("reflectivity {reflectivity}")))?;
            let t = A::sqrt_rational(Q::from_integer(1) - r)?;
            let ir = A::from_c64(Complex64::i())? * A::sqrt_rational(r)?;
            for b in m.iter_mut() {
                b[*p][*p] = t.clone();
                b[*q][*q] = t.clone();
                b[*q][*p] = ir.clone();
                b[*p][*q] = ir.clone();
            }
        }
        ElementSpec::Interleaver { ports, inverse } => {
            if ports.len() != d {
                return Err(Error::Circuit(format!("interleaver needs {d} ports, got {}", ports.len())));
            }
            for (k, b) in m.iter_mut().enumerate() {
                for &p in ports {
                    for &q in ports {
                        b[p][q] = A::zero();
                    }
                }
                for j in 0..d {
                    let to = if *inverse { (j + d - k) % d } else { (j + k) % d };
                    b[ports[to]][ports[j]] = A::one();
                }
            }
        }
        ElementSpec::PhaseGate { port, theta } => {
            if d != 2 {
                return Err(Error::Unsupported("phase gate is defined for d = 2".into()));
            }
            for (k, b) in m.iter_mut().enumerate() {
                b[*port][*port] = A::phase(*theta, k)?;
            }
        }
        ElementSpec::Delay { .. } => {
            return Err(if A::EXACT {
                Error::NotExact("a delay has no exact bin action".into())
            } else {
                Error::Unsupported("a delay needs optical parameters".into())
            });
        }
    }
    Ok(m)
}

/// Per-bin matrices of the physical element on the central comb lines.
pub fn physical_matrices<A: Amplitude>(
    el: &ElementSpec,
    n_ports: usize,
    ctx: &OpticalContext,
) -> Result<Vec<Vec<Vec<A>>>> {
    let map = el.mode_map(ctx, n_ports)?;
    (0..ctx.d)
        .map(|bin| {
            let raw = map.bin_matrix(ctx.omega_0, ctx.omega_r, ctx.d, bin);
            let mut worst = 0.0f64;
            for i in 0..n_ports {
                for j in 0..n_ports {
                    let dot: Complex64 = (0..n_ports).map(|k| raw[k][i].conj() * raw[k][j]).sum();
                    worst = worst.max((dot - if i == j { 1.0 } else { 0.0 }).norm());
                }
            }
            if worst > 1e-9 {
                return Err(Error::NonUnitary { defect: worst });
            }
            raw.into_iter().map(|row| row.into_iter().map(A::from_c64).collect()).collect()
        })
        .collect()
}

/// Applies an element. Exact arithmetic always uses the ideal action; the
/// float path evaluates the physical map when optics are given.
pub fn apply_element<A: Amplitude>(
    state: &FockState<A>,
    el: &ElementSpec,
    optics: Option<&OpticalContext>,
) -> Result<FockState<A>> {
    let l = state.layout();
    check_ports("element", &el.ports(), l.n_ports)?;
    let m = match optics {
        Some(ctx) if !A::EXACT => {
            if ctx.d != l.d {
                return Err(Error::Circuit(format!("optics have d = {}, state has {}", ctx.d, l.d)));
            }
            physical_matrices(el, l.n_ports, ctx)?
        }
        _ => ideal_matrices(el, l.n_ports, l.d)?,
    };
    state.apply_port_matrices(&m)
}

/// `<j_t|k_f> = d^(-1/2) exp(-2 pi i j k / d)`, indexed `[j][k]`.
fn time_overlaps<A: Amplitude>(d: usize) -> Result<Vec<Vec<A>>> {
    let norm = A::sqrt_rational(Q::new(1, d as i128))?;
    (0..d)
        .map(|j| {
            (0..d)
                .map(|k| {
                    let z = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * ((j * k) % d) as f64 / d as f64);
                    Ok(norm.clone() * A::from_c64(z)?)
                })
                .collect()
        })
        .collect()
}

/// Part of a post-measurement state. Its probability is
/// `weight * <state|state>`, with `weight` the product of factorials of the
/// detected occupations.
#[derive(Debug, Clone, PartialEq)]
pub struct Component<A: Amplitude> {
    pub weight: i64,
    pub state: FockState<A>,
}

/// One detector outcome: its probability and the unnormalized remainder,
/// an incoherent sum of components when photons carry labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch<A: Amplitude> {
    pub probability: A::Real,
    pub components: Vec<Component<A>>,
}

/// Every outcome of the detectors with nonzero probability.
pub fn measure_all<A: Amplitude>(
    state: &FockState<A>,
    detectors: &[DetectorPlacement],
) -> Result<BTreeMap<OutcomeKey, Branch<A>>> {
    let l = state.layout();
    let ports: Vec<usize> = detectors.iter().map(|x| x.port).collect();
    check_ports("detectors", &ports, l.n_ports)?;
    let mut det_of_port = vec![None; l.n_ports];
    for (i, x) in detectors.iter().enumerate() {
        det_of_port[x.port] = Some(i);
    }
    let rot = if detectors.iter().any(|x| x.basis == Basis::Time) { time_overlaps::<A>(l.d)? } else { Vec::new() };
    let rotated = state.substitute(&|m| {
        let (label, p, k) = l.split(m);
        match det_of_port[p] {
            Some(i) if detectors[i].basis == Basis::Time => {
                (0..l.d).map(|j| (l.index(label, p, j), rot[j][k].clone())).collect()
            }
            _ => vec![(m, A::one())],
        }
    });

    let mut groups: BTreeMap<OutcomeKey, BTreeMap<Occupation, FockState<A>>> = BTreeMap::new();
    for (occ, c) in rotated.terms() {
        let mut key = vec![vec![0u8; l.d]; detectors.len()];
        let mut detected = vec![0u8; occ.len()];
        let mut rest = occ.clone();
        for (m, &n) in occ.iter().enumerate() {
            let (_, p, b) = l.split(m);
            if let (true, Some(i)) = (n > 0, det_of_port[p]) {
                key[i][b] += n;
                detected[m] = n;
                rest[m] = 0;
            }
        }
        groups.entry(key).or_default().entry(detected).or_insert_with(|| FockState::zero(l)).add_term(rest, c.clone());
    }

    let mut out = BTreeMap::new();
    for (key, parts) in groups {
        let mut probability = A::real_int(0);
        let mut components = Vec::new();
        for (detected, s) in parts {
            if s.is_zero() {
                continue;
            }
            let weight: i64 = detected.iter().map(|&n| factorial(n)).product();
            probability = probability + A::real_int(weight) * s.norm_sqr();
            components.push(Component { weight, state: s });
        }
        if !A::real_is_zero(&probability) {
            out.insert(key, Branch { probability, components });
        }
    }
    Ok(out)
}

/// A single outcome; impossible outcomes give probability 0 and no state.
pub fn measure<A: Amplitude>(
    state: &FockState<A>,
    detectors: &[DetectorPlacement],
    outcome: &OutcomeKey,
) -> Result<Branch<A>> {
    Ok(measure_all(state, detectors)?
        .remove(outcome)
        .unwrap_or(Branch { probability: A::real_int(0), components: Vec::new() }))
}

/// A probability-like value: exact text when available and its float.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Number {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
    pub value: f64,
}

impl Number {
    fn of<A: Amplitude>(r: &A::Real) -> Self {
        Self { exact: A::EXACT.then(|| r.to_string()), value: A::real_to_f64(r) }
    }
}

impl std::fmt::Display for Number {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.exact {
            Some(e) => write!(f, "{e}"),
            None => write!(f, "{:.9}", self.value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchReport {
    pub outcome: OutcomeKey,
    pub probability: Number,
    pub heralded: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feed_forward: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pauli_frame: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<Number>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub got: Number,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub circuit: String,
    pub exact: bool,
    pub visibility: f64,
    pub detectors: Vec<DetectorPlacement>,
    pub total_probability: Number,
    pub success_prob: Number,
    pub feed_forward_prob: Number,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feed_forward_fraction: Option<Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_fidelity: Option<Number>,
    pub branches: Vec<BranchReport>,
    pub checks: Vec<Check>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn success_line(&self) -> String {
        let tag = if self.exact { "exact" } else { "float" };
        format!("success_prob = {} ({tag})", self.success_prob)
    }

    pub fn table(&self) -> String {
        let mut s = String::new();
        let mode = if self.exact { "exact" } else { "float" };
        let _ = writeln!(s, "circuit: {} ({mode}, V = {})", self.circuit, self.visibility);
        let _ = writeln!(
            s,
            "{:<28} {:>16} {:>7} {:>14} {:>6} {:>16}",
            "outcome", "probability", "herald", "feed-forward", "frame", "fidelity"
        );
        for b in &self.branches {
            let outcome: Vec<String> =
                self.detectors.iter().zip(&b.outcome).map(|(det, row)| format!("p{}{:?}", det.port, row)).collect();
            let _ = writeln!(
                s,
                "{:<28} {:>16} {:>7} {:>14} {:>6} {:>16}",
                outcome.join(" "),
                b.probability.to_string(),
                if b.heralded { "yes" } else { "" },
                b.feed_forward.as_deref().unwrap_or(""),
                b.pauli_frame.as_deref().unwrap_or(""),
                b.fidelity.as_ref().map(|f| f.to_string()).unwrap_or_default(),
            );
        }
        let _ = writeln!(s, "total = {}", self.total_probability);
        let _ = writeln!(s, "{}", self.success_line());
        if let Some(f) = &self.feed_forward_fraction {
            let _ = writeln!(s, "feed_forward_fraction = {f}");
        }
        if let Some(f) = &self.min_fidelity {
            let _ = writeln!(s, "min_fidelity = {f}");
        }
        for c in &self.checks {
            let verdict = if c.pass { "PASS" } else { "FAIL" };
            let _ = writeln!(s, "check {}: expected {}, got {} {verdict}", c.name, c.expected, c.got);
        }
        s
    }
}

/// Pauli corrections on `n` qubits, identity first: `(name, bin map)`.
fn pauli_frames(n: usize) -> Vec<String> {
    (0..4usize.pow(n as u32))
        .map(|f| (0..n).map(|i| ['I', 'X', 'Z', 'Y'][(f >> (2 * (n - 1 - i))) & 3]).collect())
        .collect()
}

fn apply_pauli<A: Amplitude>(s: &FockState<A>, ports: &[usize], frame: &str) -> FockState<A> {
    let l = s.layout();
    s.substitute(&|m| {
        let (label, p, b) = l.split(m);
        let op = ports.iter().position(|&q| q == p).map_or('I', |i| frame.as_bytes()[i] as char);
        let flip = matches!(op, 'X' | 'Y');
        let sign = matches!(op, 'Z' | 'Y') && b == 1;
        let to = if flip { 1 - b } else { b };
        vec![(l.index(label, p, to), if sign { -A::one() } else { A::one() })]
    })
}

fn parse_q(s: &str) -> Result<Q> {
    Q::from_str(s.trim()).map_err(|_| crate::invalid(format!("'{s}' is not a rational number")))
}

fn same<A: Amplitude>(a: &A::Real, b: &A::Real) -> bool {
    if A::EXACT {
        a == b
    } else {
        (A::real_to_f64(a) - A::real_to_f64(b)).abs() < 1e-9
    }
}

struct Row<A: Amplitude> {
    key: OutcomeKey,
    probability: A::Real,
    heralded: bool,
    feed_forward: Option<String>,
    frame: Option<String>,
    fidelity: Option<A::Real>,
}

/// Runs a circuit over all detector outcomes at visibility `visibility`.
pub fn run_heralded<A: Amplitude>(c: &Circuit, visibility: f64) -> Result<RunReport> {
    c.validate()?;
    if !(0.0..=1.0).contains(&visibility) {
        return Err(crate::invalid(format!("visibility {visibility} outside [0, 1]")));
    }
    let v = A::real_from_f64(visibility)?;
    let w = A::real_int(1) - v.clone();
    let ind = measure_all(&c.evolve::<A>(false)?, &c.detectors)?;
    let dist = if visibility < 1.0 { Some(measure_all(&c.evolve::<A>(true)?, &c.detectors)?) } else { None };
    let keys: Vec<OutcomeKey> =
        ind.keys().chain(dist.iter().flat_map(|m| m.keys())).cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let frames: Vec<(String, FockState<A>)> = match &c.target {
        Some(t) => {
            let base = t.build::<A>(c.n_ports, c.d)?;
            pauli_frames(t.ports.len()).into_iter().map(|f| (f.clone(), apply_pauli(&base, &t.ports, &f))).collect()
        }
        None => Vec::new(),
    };
    let zero = A::real_int(0);
    let mix = |a: A::Real, b: A::Real| v.clone() * a + w.clone() * b;

    let rows: Result<Vec<Row<A>>> = keys
        .par_iter()
        .map(|key| {
            let bi = ind.get(key);
            let bd = dist.as_ref().and_then(|m| m.get(key));
            let probability = mix(
                bi.map_or(zero.clone(), |b| b.probability.clone()),
                bd.map_or(zero.clone(), |b| b.probability.clone()),
            );
            let heralded = c.herald.accepts(key);
            let mut row: Row<A> =
                Row { key: key.clone(), probability, heralded, feed_forward: None, frame: None, fidelity: None };
            if !heralded {
                return Ok(row);
            }
            let rule = c.feed_forward.iter().find(|r| r.when.matches(key));
            row.feed_forward = rule.map(|r| r.label.clone());
            let correct = |b: Option<&Branch<A>>| -> Result<Vec<Component<A>>> {
                let mut out = Vec::new();
                for comp in b.map_or(&[][..], |b| &b.components[..]) {
                    let mut s = comp.state.clone();
                    for el in rule.map_or(&[][..], |r| &r.apply[..]) {
                        s = apply_element(&s, el, c.optics.as_ref())?;
                    }
                    out.push(Component { weight: comp.weight, state: s });
                }
                Ok(out)
            };
            let ci = correct(bi)?;
            let cd = correct(bd)?;
            let overlap = |t: &FockState<A>, comps: &[Component<A>]| {
                comps.iter().fold(zero.clone(), |acc, x| acc + A::real_int(x.weight) * sector_overlap(t, &x.state))
            };
            let mut best: Option<(String, A::Real)> = None;
            for (name, t) in &frames {
                let num = mix(overlap(t, &ci), overlap(t, &cd));
                if best.as_ref().is_none_or(|(_, b)| num > *b) {
                    best = Some((name.clone(), num));
                }
            }
            if let Some((name, num)) = best {
                row.frame = Some(name);
                row.fidelity = Some(num / row.probability.clone());
            }
            Ok(row)
        })
        .collect();
    let rows = rows?;

    let mut total = zero.clone();
    let mut success = zero.clone();
    let mut ff = zero.clone();
    let mut min_fid: Option<A::Real> = None;
    for r in &rows {
        total = total + r.probability.clone();
        if r.heralded {
            success = success + r.probability.clone();
            if r.feed_forward.is_some() {
                ff = ff + r.probability.clone();
            }
            if let Some(f) = &r.fidelity {
                if min_fid.as_ref().is_none_or(|m| f < m) {
                    min_fid = Some(f.clone());
                }
            }
        }
    }
    let fraction = (!A::real_is_zero(&success)).then(|| ff.clone() / success.clone());

    let mut checks = Vec::new();
    let mut total_ok = same::<A>(&total, &A::real_int(1));
    if !A::EXACT {
        total_ok = (A::real_to_f64(&total) - 1.0).abs() < 1e-9;
    }
    checks.push(Check { name: "total".into(), expected: "1".into(), got: Number::of::<A>(&total), pass: total_ok });
    // expectations describe indistinguishable photons
    if let (Some(e), true) = (&c.expect, visibility == 1.0) {
        let mut push = |name: &str, want: &Option<String>, got: Option<&A::Real>, at_least: bool| -> Result<()> {
            if let Some(want) = want {
                let target = A::real_from_rational(parse_q(want)?);
                let (pass, got) = match got {
                    Some(g) => {
                        let ok = same::<A>(g, &target) || (at_least && *g > target);
                        (ok, Number::of::<A>(g))
                    }
                    None => (false, Number { exact: None, value: f64::NAN }),
                };
                checks.push(Check { name: name.into(), expected: want.clone(), got, pass });
            }
            Ok(())
        };
        push("success", &e.success, Some(&success), false)?;
        push("feed_forward_fraction", &e.feed_forward_fraction, fraction.as_ref(), false)?;
        push("fidelity", &e.fidelity, min_fid.as_ref(), true)?;
    }

    Ok(RunReport {
        circuit: c.name.clone(),
        exact: A::EXACT,
        visibility,
        detectors: c.detectors.clone(),
        total_probability: Number::of::<A>(&total),
        success_prob: Number::of::<A>(&success),
        feed_forward_prob: Number::of::<A>(&ff),
        feed_forward_fraction: fraction.as_ref().map(Number::of::<A>),
        min_fidelity: min_fid.as_ref().map(Number::of::<A>),
        branches: rows
            .iter()
            .map(|r| BranchReport {
                outcome: r.key.clone(),
                probability: Number::of::<A>(&r.probability),
                heralded: r.heralded,
                feed_forward: r.feed_forward.clone(),
                pauli_frame: r.frame.clone(),
                fidelity: r.fidelity.as_ref().map(Number::of::<A>),
            })
            .collect(),
        checks,
    })
}

/// Runs with exact arithmetic when `exact`, floats otherwise.
pub fn run_circuit(c: &Circuit, visibility: f64, exact: bool) -> Result<RunReport> {
    if exact {
        run_heralded::<super::scalar::ExactComplex>(c, visibility)
    } else {
        run_heralded::<Complex64>(c, visibility)
    }
}

/// Checked-in circuit files, by name.
pub const BUILTIN_CIRCUITS: &[(&str, &str)] = &[
    ("bell_generator", include_str!("../../circuits/bell_generator.json")),
    ("type_i", include_str!("../../circuits/type_i.json")),
    ("type_ii_prime", include_str!("../../circuits/type_ii_prime.json")),
    ("type_i_prime", include_str!("../../circuits/type_i_prime.json")),
    ("hom", include_str!("../../circuits/hom.json")),
];

pub fn builtin(name: &str) -> Result<Circuit> {
    let (_, text) = BUILTIN_CIRCUITS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| crate::invalid(format!("no built-in circuit '{name}'")))?;
    Circuit::from_json(text)
}
