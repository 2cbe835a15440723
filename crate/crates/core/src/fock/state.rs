// Copyright 2026 TFGKP Contributors
// SPDX-License-Identifier: Apache-2.0

//! Few-photon states over (label, port, bin) modes.
//!
//! A state is stored as a polynomial in creation operators acting on the
//! vacuum: `sum_n c_n prod_m (a_m^dag)^(n_m) |0>`. Linear optics is then a
//! substitution of linear forms, with no square roots of factorials; the
//! normalized Fock amplitude of occupation `n` is `c_n sqrt(prod n_m!)`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::scalar::Amplitude;
use crate::{Error, Result};

/// Mode index layout: `((label * n_ports) + port) * d + bin`. Labels are an
/// internal degree of freedom that makes photons distinguishable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeLayout {
    pub n_ports: usize,
    pub d: usize,
    pub labels: usize,
}

impl ModeLayout {
    pub fn new(n_ports: usize, d: usize, labels: usize) -> Result<Self> {
        if n_ports == 0 || d == 0 || labels == 0 {
            return Err(crate::invalid("mode layout needs ports, bins and labels"));
        }
        Ok(Self { n_ports, d, labels })
    }

    pub fn len(&self) -> usize {
        self.labels * self.n_ports * self.d
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, label: usize, port: usize, bin: usize) -> usize {
        (label * self.n_ports + port) * self.d + bin
    }

    /// `(label, port, bin)` of a mode index.
    pub fn split(&self, m: usize) -> (usize, usize, usize) {
        (m / (self.n_ports * self.d), (m / self.d) % self.n_ports, m % self.d)
    }
}

pub type Occupation = Vec<u8>;

#[derive(Debug, Clone, PartialEq)]
pub struct FockState<A: Amplitude> {
    layout: ModeLayout,
    terms: BTreeMap<Occupation, A>,
}

pub(crate) fn factorial(n: u8) -> i64 {
    (1..=n as i64).product()
}

impl<A: Amplitude> FockState<A> {
    pub fn vacuum(layout: ModeLayout) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![0; layout.len()], A::one());
        Self { layout, terms }
    }

    pub fn zero(layout: ModeLayout) -> Self {
        Self { layout, terms: BTreeMap::new() }
    }

    pub fn layout(&self) -> ModeLayout {
        self.layout
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Occupation, &A)> {
        self.terms.iter()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `c` to the coefficient of the monomial `occ`.
    pub fn add_term(&mut self, occ: Occupation, c: A) {
        let v = match self.terms.remove(&occ) {
            Some(old) => old + c,
            None => c,
        };
        if !v.is_zero() {
            self.terms.insert(occ, v);
        }
    }

    /// Product of polynomials on disjoint photons (tensoring two inputs).
    pub fn product(&self, other: &Self) -> Result<Self> {
        if self.layout != other.layout {
            return Err(crate::invalid("layouts differ"));
        }
        let mut out = Self::zero(self.layout);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let occ = a.iter().zip(b).map(|(x, y)| x + y).collect();
                out.add_term(occ, ca.clone() * cb.clone());
            }
        }
        Ok(out)
    }

    pub fn scaled(&self, k: &A) -> Self {
        let mut out = Self::zero(self.layout);
        for (o, c) in &self.terms {
            out.add_term(o.clone(), c.clone() * k.clone());
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (o, c) in &other.terms {
            out.add_term(o.clone(), c.clone());
        }
        out
    }

    /// Photon number of every term, or an error if it is not fixed.
    pub fn photon_number(&self) -> Result<usize> {
        let mut n = None;
        for o in self.terms.keys() {
            let k = o.iter().map(|&x| x as usize).sum::<usize>();
            match n {
                None => n = Some(k),
                Some(m) if m != k => return Err(crate::invalid("superposition of different photon numbers")),
                _ => {}
            }
        }
        Ok(n.unwrap_or(0))
    }

    /// `<self|self>` with `<n|n>` of a monomial equal to `prod n_m!`.
    pub fn norm_sqr(&self) -> A::Real {
        self.inner_real(self)
    }

    fn inner_real(&self, other: &Self) -> A::Real {
        let mut acc = A::real_int(0);
        for (o, c) in &self.terms {
            if let Some(c2) = other.terms.get(o) {
                let w: i64 = o.iter().map(|&n| factorial(n)).product();
                acc = acc + A::real_int(w) * (c.conj() * c2.clone()).re();
            }
        }
        acc
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> A {
        let mut acc = A::zero();
        for (o, c) in &self.terms {
            if let Some(c2) = other.terms.get(o) {
                let w: i64 = o.iter().map(|&n| factorial(n)).product();
                acc = acc + A::from_real(A::real_int(w)) * c.conj() * c2.clone();
            }
        }
        acc
    }

    /// Applies `a_m^dag -> sum_k f(m)[k].1 a_{f(m)[k].0}^dag` to every photon.
    pub fn substitute(&self, f: &dyn Fn(usize) -> Vec<(usize, A)>) -> Self {
        let mut out = Self::zero(self.layout);
        for (occ, c) in &self.terms {
            let mut poly: BTreeMap<Occupation, A> = BTreeMap::new();
            poly.insert(vec![0; occ.len()], c.clone());
            for (m, &n) in occ.iter().enumerate() {
                if n == 0 {
                    continue;
                }
                let image = f(m);
                for _ in 0..n {
                    let mut next: BTreeMap<Occupation, A> = BTreeMap::new();
                    for (o, v) in &poly {
                        for (t, a) in &image {
                            let mut o2 = o.clone();
                            o2[*t] += 1;
                            let e = next.entry(o2).or_insert_with(A::zero);
                            *e = e.clone() + v.clone() * a.clone();
                        }
                    }
                    poly = next;
                }
            }
            for (o, v) in poly {
                if !v.is_zero() {
                    out.add_term(o, v);
                }
            }
        }
        out
    }

    /// Applies per-bin port matrices `m[bin][out][in]` to every label.
    pub fn apply_port_matrices(&self, m: &[Vec<Vec<A>>]) -> Result<Self> {
        let l = self.layout;
        if m.len() != l.d || m.iter().any(|b| b.len() != l.n_ports || b.iter().any(|r| r.len() != l.n_ports)) {
            return Err(Error::Circuit("element matrices do not match the mode layout".into()));
        }
        Ok(self.substitute(&|mode| {
            let (label, port, bin) = l.split(mode);
            (0..l.n_ports)
                .filter(|&q| !m[bin][q][port].is_zero())
                .map(|q| (l.index(label, q, bin), m[bin][q][port].clone()))
                .collect()
        }))
    }

    /// Normalized amplitudes `c_n sqrt(prod n!)` as floats, for display.
    pub fn fock_amplitudes(&self) -> Vec<(Occupation, Complex64)> {
        self.terms
            .iter()
            .map(|(o, c)| {
                let w: f64 = o.iter().map(|&n| factorial(n) as f64).product();
                (o.clone(), c.to_c64() * w.sqrt())
            })
            .collect()
    }

    /// Removes labels: every photon moves to label 0. Only meaningful when
    /// each port holds photons of a single label.
    pub fn strip_labels(&self) -> Self {
        let l = self.layout;
        let flat = ModeLayout { labels: 1, ..l };
        let mut out = Self::zero(flat);
        for (o, c) in &self.terms {
            let mut o2 = vec![0u8; flat.len()];
            for (m, &n) in o.iter().enumerate() {
                let (_, p, b) = l.split(m);
                o2[flat.index(0, p, b)] += n;
            }
            out.add_term(o2, c.clone());
        }
        out
    }

    /// Splits into components that differ in which label sits on which port
    /// (`sig[port]` = sorted labels there). Tracing out labels leaves the
    /// incoherent mixture of these components.
    pub fn label_sectors(&self) -> Vec<(Vec<Vec<usize>>, Self)> {
        let l = self.layout;
        let mut map: BTreeMap<Vec<Vec<usize>>, Self> = BTreeMap::new();
        for (o, c) in &self.terms {
            let mut sig = vec![Vec::new(); l.n_ports];
            for (m, &n) in o.iter().enumerate() {
                let (lab, p, _) = l.split(m);
                for _ in 0..n {
                    sig[p].push(lab);
                }
            }
            for s in sig.iter_mut() {
                s.sort_unstable();
            }
            map.entry(sig).or_insert_with(|| Self::zero(l)).add_term(o.clone(), c.clone());
        }
        map.into_iter().collect()
    }

    /// Keeps the terms for which `keep` returns a new occupation.
    pub fn filter_map(&self, keep: &dyn Fn(&Occupation) -> Option<Occupation>) -> Self {
        let mut out = Self::zero(self.layout);
        for (o, c) in &self.terms {
            if let Some(o2) = keep(o) {
                out.add_term(o2, c.clone());
            }
        }
        out
    }
}

/// `|<t|s>|^2` for a target built without labels against a labeled state,
/// summing the label sectors incoherently.
pub fn sector_overlap<A: Amplitude>(target: &FockState<A>, state: &FockState<A>) -> A::Real {
    let mut acc = A::real_int(0);
    for (_, comp) in state.label_sectors() {
        let z = target.inner(&comp.strip_labels());
        acc = acc + z.norm_sqr();
    }
    acc
}
