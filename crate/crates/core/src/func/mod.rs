// Copyright 2026 TFGKP Contributors
// SPDX-License-Identifier: Apache-2.0

//! Probability amplitude functions over time or angular frequency.
//!
//! Conventions used throughout:
//!
//! - translation `T_w f(x) = f(x + w)`
//! - modulation `M_t f(x) = exp(-i x t) f(x)`
//! - Fourier transform `F(t) = (2 pi)^(-1/2) int f(x) exp(-i x t) dx`
//!
//! so that `F[T_w f] = M_{-w} F[f]`, `F[M_t f] = T_t F[f]` and
//! `F[f * g] = sqrt(2 pi) F[f] F[g]`. Three representations coexist: closed
//! form shapes, combs of shapes and sampled grids. Operations stay in closed
//! form where the algebra allows and fall back to a grid otherwise.

mod comb;
mod grid;
mod identity;
mod shape;

pub use comb::{CombFunction, DEFAULT_FLAT_LINES, DEFAULT_MASS_TOL};
pub use grid::{GridFunction, GridSpec, DEFAULT_GRID_POINTS};
pub use identity::{comb_dft_identity_check, printed_sign_holds, DftSign, IdentityReport};
pub use shape::{AnalyticShape, ShapeKind};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Physical axis of a function. Fourier transforms swap the two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisKind {
    /// Time in picoseconds.
    TimePs,
    /// Angular frequency (or detuning) in rad/ps.
    AngularFrequency,
}

impl AxisKind {
    pub fn conjugate(self) -> Self {
        match self {
            AxisKind::TimePs => AxisKind::AngularFrequency,
            AxisKind::AngularFrequency => AxisKind::TimePs,
        }
    }
}

/// Internal representation of a [`TimeFrequencyFunction`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "repr", rename_all = "snake_case")]
pub enum Repr {
    Shape(AnalyticShape),
    Comb(CombFunction),
    Grid(GridFunction),
    Sum { terms: Vec<Repr> },
}

/// A complex amplitude over one [`AxisKind`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeFrequencyFunction {
    pub axis: AxisKind,
    pub repr: Repr,
}

fn repr_support(r: &Repr) -> Option<(f64, f64)> {
    match r {
        Repr::Shape(s) => s.support_hint(),
        Repr::Grid(g) => Some((g.origin(), g.spec().end())),
        Repr::Comb(c) => {
            let (plo, phi) = c.peak.support_hint().unwrap_or((-c.period, c.period));
            let mut lo = c.center(c.n_min).min(c.center(c.n_max)) + plo;
            let mut hi = c.center(c.n_min).max(c.center(c.n_max)) + phi;
            if let Some((elo, ehi)) = c.envelope.support_hint() {
                lo = lo.max(elo);
                hi = hi.min(ehi);
            }
            Some((lo, hi))
        }
        Repr::Sum { terms } => terms.iter().filter_map(repr_support).reduce(|a, b| (a.0.min(b.0), a.1.max(b.1))),
    }
}

impl Repr {
    fn eval_mollified(&self, x: f64, width: f64) -> Complex64 {
        match self {
            Repr::Shape(s) => s.eval_mollified(x, width),
            Repr::Comb(c) => c.eval_mollified(x, width),
            Repr::Grid(g) => g.interpolate(x),
            Repr::Sum { terms } => terms.iter().map(|t| t.eval_mollified(x, width)).sum(),
        }
    }

    fn sample(&self, spec: GridSpec, width: f64) -> Vec<Complex64> {
        match self {
            Repr::Comb(c) => c.sample(spec, width),
            Repr::Grid(g) => g.resample(spec).samples().to_vec(),
            Repr::Sum { terms } => {
                let mut acc = vec![Complex64::new(0.0, 0.0); spec.len];
                for t in terms {
                    for (a, v) in acc.iter_mut().zip(t.sample(spec, width)) {
                        *a += v;
                    }
                }
                acc
            }
            Repr::Shape(s) => (0..spec.len).map(|i| s.eval_mollified(spec.x(i), width)).collect(),
        }
    }

    fn map(&self, f: &dyn Fn(&Repr) -> Repr) -> Repr {
        match self {
            Repr::Sum { terms } => Repr::Sum { terms: terms.iter().map(|t| t.map(f)).collect() },
            other => f(other),
        }
    }

    fn translate(&self, w: f64) -> Repr {
        self.map(&|r| match r {
            Repr::Shape(s) => Repr::Shape(s.translate(w)),
            Repr::Comb(c) => Repr::Comb(c.translate(w)),
            Repr::Grid(g) => Repr::Grid(g.translate(w)),
            Repr::Sum { .. } => unreachable!(),
        })
    }

    fn modulate(&self, t: f64) -> Repr {
        self.map(&|r| match r {
            Repr::Shape(s) => Repr::Shape(s.modulate(t)),
            Repr::Comb(c) => Repr::Comb(c.modulate(t)),
            Repr::Grid(g) => Repr::Grid(g.modulate(t)),
            Repr::Sum { .. } => unreachable!(),
        })
    }

    fn reflect(&self) -> Repr {
        self.map(&|r| match r {
            Repr::Shape(s) => Repr::Shape(s.reflect()),
            Repr::Comb(c) => Repr::Comb(c.reflect()),
            Repr::Grid(g) => Repr::Grid(g.reflect()),
            Repr::Sum { .. } => unreachable!(),
        })
    }

    fn scaled(&self, k: Complex64) -> Repr {
        self.map(&|r| match r {
            Repr::Shape(s) => Repr::Shape(s.clone().scaled(k)),
            Repr::Comb(c) => Repr::Comb(c.clone().scaled(k)),
            Repr::Grid(g) => Repr::Grid(g.clone().scaled(k)),
            Repr::Sum { .. } => unreachable!(),
        })
    }

    fn fourier(&self) -> Result<Repr> {
        Ok(match self {
            Repr::Shape(s) => Repr::Shape(s.fourier()),
            Repr::Comb(c) => Repr::Comb(c.fourier()?),
            Repr::Grid(g) => Repr::Grid(g.fourier()),
            Repr::Sum { terms } => Repr::Sum { terms: terms.iter().map(|t| t.fourier()).collect::<Result<_>>()? },
        })
    }
}

impl TimeFrequencyFunction {
    pub fn shape(axis: AxisKind, s: AnalyticShape) -> Self {
        Self { axis, repr: Repr::Shape(s) }
    }

    pub fn comb(axis: AxisKind, c: CombFunction) -> Self {
        Self { axis, repr: Repr::Comb(c) }
    }

    pub fn grid(g: GridFunction) -> Self {
        Self { axis: g.axis(), repr: Repr::Grid(g) }
    }

    /// Sum of terms on a common axis.
    pub fn sum(terms: Vec<TimeFrequencyFunction>) -> Result<Self> {
        let axis = terms.first().map(|t| t.axis).ok_or_else(|| crate::invalid("empty sum"))?;
        let mut out = Vec::with_capacity(terms.len());
        for t in terms {
            if t.axis != axis {
                return Err(Error::AxisMismatch { left: axis, right: t.axis });
            }
            match t.repr {
                Repr::Sum { terms } => out.extend(terms),
                r => out.push(r),
            }
        }
        Ok(Self { axis, repr: Repr::Sum { terms: out } })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Self::sum(vec![self.clone(), other.clone()])
    }

    /// Value at `x`. Dirac components are mollified with std `width`.
    pub fn eval_mollified(&self, x: f64, width: f64) -> Complex64 {
        self.repr.eval_mollified(x, width)
    }

    /// Value at `x`; Dirac components contribute zero.
    pub fn eval(&self, x: f64) -> Complex64 {
        self.repr.eval_mollified(x, 0.0).finite_or_zero()
    }

    /// Samples onto `spec`. Dirac components become Gaussians of std
    /// `3 * step`, which keeps their mass and resolves them on the grid.
    pub fn sample(&self, spec: GridSpec) -> GridFunction {
        let samples = self.repr.sample(spec, 3.0 * spec.step);
        GridFunction::new(spec, self.axis, samples).expect("sample count matches grid")
    }

    /// Interval holding the significant part of the function, if bounded.
    pub fn support_hint(&self) -> Option<(f64, f64)> {
        repr_support(&self.repr)
    }

    /// A grid of [`DEFAULT_GRID_POINTS`] covering the support with a margin.
    pub fn default_grid(&self) -> Result<GridSpec> {
        let (lo, hi) = self
            .support_hint()
            .ok_or_else(|| Error::Unsupported("function without bounded support needs an explicit grid".into()))?;
        let pad = 0.05 * (hi - lo).max(1e-9);
        GridSpec::covering(lo - pad, hi + pad, DEFAULT_GRID_POINTS)
    }

    pub fn translate(&self, omega: f64) -> Self {
        Self { axis: self.axis, repr: self.repr.translate(omega) }
    }

    pub fn modulate(&self, tau: f64) -> Self {
        Self { axis: self.axis, repr: self.repr.modulate(tau) }
    }

    pub fn reflect(&self) -> Self {
        Self { axis: self.axis, repr: self.repr.reflect() }
    }

    pub fn scaled(&self, k: Complex64) -> Self {
        Self { axis: self.axis, repr: self.repr.scaled(k) }
    }

    pub fn fourier(&self) -> Result<Self> {
        Ok(Self { axis: self.axis.conjugate(), repr: self.repr.fourier()? })
    }

    pub fn inverse_fourier(&self) -> Result<Self> {
        Ok(Self { axis: self.axis.conjugate(), repr: self.repr.fourier()?.reflect() })
    }

    fn check_axis(&self, other: &Self) -> Result<()> {
        if self.axis != other.axis {
            return Err(Error::AxisMismatch { left: self.axis, right: other.axis });
        }
        Ok(())
    }

    fn fallback_grid(&self, other: &Self) -> Result<GridSpec> {
        match (self.support_hint(), other.support_hint()) {
            (Some(a), Some(b)) => {
                let lo = a.0.max(b.0);
                let hi = a.1.min(b.1);
                let (lo, hi) = if hi > lo { (lo, hi) } else { (a.0.min(b.0), a.1.max(b.1)) };
                let pad = 0.05 * (hi - lo).max(1e-9);
                GridSpec::covering(lo - pad, hi + pad, DEFAULT_GRID_POINTS)
            }
            (Some(_), None) => self.default_grid(),
            (None, Some(_)) => other.default_grid(),
            (None, None) => Err(Error::Unsupported("product of two unbounded functions needs an explicit grid".into())),
        }
    }

    /// Pointwise product, in closed form when the algebra allows.
    pub fn pointwise_mul(&self, other: &Self) -> Result<Self> {
        self.check_axis(other)?;
        let closed = match (&self.repr, &other.repr) {
            (Repr::Shape(a), Repr::Shape(b)) => a.try_mul(b).map(Repr::Shape),
            (Repr::Comb(c), Repr::Shape(s)) | (Repr::Shape(s), Repr::Comb(c)) => c.try_mul_shape(s).map(Repr::Comb),
            (Repr::Sum { terms }, _) => {
                let parts = terms
                    .iter()
                    .map(|t| Self { axis: self.axis, repr: t.clone() }.pointwise_mul(other))
                    .collect::<Result<Vec<_>>>()?;
                return Self::sum(parts);
            }
            (_, Repr::Sum { .. }) => return other.pointwise_mul(self),
            _ => None,
        };
        if let Some(repr) = closed {
            return Ok(Self { axis: self.axis, repr });
        }
        let spec = match (&self.repr, &other.repr) {
            (Repr::Grid(g), _) => g.spec(),
            (_, Repr::Grid(g)) => g.spec(),
            _ => self.fallback_grid(other)?,
        };
        Ok(Self::grid(self.sample(spec).pointwise_mul(&other.sample(spec))?))
    }

    /// Convolution `(f * g)(x) = int f(y) g(x - y) dy`.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        self.check_axis(other)?;
        let closed = match (&self.repr, &other.repr) {
            (Repr::Shape(d), Repr::Shape(s)) | (Repr::Shape(s), Repr::Shape(d)) if d.is_dirac() => {
                Some(Repr::Shape(s.translate(-d.center).scaled(d.scale)))
            }
            (Repr::Shape(a), Repr::Shape(b)) => gaussian_convolution(a, b).map(Repr::Shape),
            (Repr::Comb(c), Repr::Shape(s)) | (Repr::Shape(s), Repr::Comb(c)) if c.peak.is_dirac() => {
                let folded = c.fold_envelope()?;
                let peak = s.translate(-c.peak.center).scaled(c.peak.scale);
                Some(Repr::Comb(CombFunction { peak, ..folded }))
            }
            (Repr::Sum { terms }, _) => {
                let parts = terms
                    .iter()
                    .map(|t| Self { axis: self.axis, repr: t.clone() }.convolve(other))
                    .collect::<Result<Vec<_>>>()?;
                return Self::sum(parts);
            }
            (_, Repr::Sum { .. }) => return other.convolve(self),
            _ => None,
        };
        if let Some(repr) = closed {
            return Ok(Self { axis: self.axis, repr });
        }
        let (a, b) = (self.default_grid()?, other.default_grid()?);
        let step = a.step.min(b.step);
        let spec_a = GridSpec::new(a.origin, step, ((a.end() - a.origin) / step).ceil() as usize + 1)?;
        let spec_b = GridSpec::new(b.origin, step, ((b.end() - b.origin) / step).ceil() as usize + 1)?;
        Ok(Self::grid(self.sample(spec_a).convolve(&other.sample(spec_b))?))
    }

    /// Squared L2 norm; closed form for shapes, otherwise sampled on `spec`
    /// (or the default grid).
    pub fn norm_sqr(&self, spec: Option<GridSpec>) -> Result<f64> {
        if let Repr::Shape(s) = &self.repr {
            if let Some(n) = s.norm_sqr() {
                return Ok(n);
            }
            return Err(Error::NotNormalizable(format!("{:?}", s.kind)));
        }
        let spec = match spec {
            Some(s) => s,
            None => self.default_grid()?,
        };
        Ok(self.sample(spec).norm_sqr())
    }

    /// `int conj(f) g` on `spec`.
    pub fn inner_product(&self, other: &Self, spec: GridSpec) -> Result<Complex64> {
        self.check_axis(other)?;
        Ok(self.sample(spec).inner(&other.sample(spec)))
    }

    /// Root-mean-square distance `(int |f - g|^2)^(1/2)` on `spec`.
    pub fn l2_distance(&self, other: &Self, spec: GridSpec) -> Result<f64> {
        self.check_axis(other)?;
        let a = self.sample(spec);
        let b = other.sample(spec);
        let s: f64 = a.samples().iter().zip(b.samples()).map(|(x, y)| (x - y).norm_sqr()).sum();
        Ok((s * spec.step).sqrt())
    }
}

fn gaussian_convolution(a: &AnalyticShape, b: &AnalyticShape) -> Option<AnalyticShape> {
    // M(f * g) = Mf * Mg, so equal modulations factor out
    match (&a.kind, &b.kind) {
        (ShapeKind::Gaussian { sigma: s1 }, ShapeKind::Gaussian { sigma: s2 })
            if (a.modulation - b.modulation).abs() <= 1e-15 * (1.0 + a.modulation.abs()) =>
        {
            let sigma = (s1 * s1 + s2 * s2).sqrt();
            // with modulation m, e^{-ixm} g(x - c) = e^{-icm} e^{-i(x-c)m} g(x - c)
            let mut out = AnalyticShape::gaussian(sigma).centered_at(a.center + b.center).modulate(a.modulation);
            out.scale = a.scale * b.scale;
            Some(out)
        }
        _ => None,
    }
}

trait FiniteOrZero {
    fn finite_or_zero(self) -> Self;
}

impl FiniteOrZero for Complex64 {
    fn finite_or_zero(self) -> Self {
        if self.is_finite() {
            self
        } else {
            Complex64::new(0.0, 0.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const W: AxisKind = AxisKind::AngularFrequency;

    #[test]
    fn fourier_flips_axis() {
        let f = TimeFrequencyFunction::shape(W, AnalyticShape::gaussian(1.0));
        assert_eq!(f.fourier().unwrap().axis, AxisKind::TimePs);
    }

    #[test]
    fn mismatched_axes_are_rejected() {
        let f = TimeFrequencyFunction::shape(W, AnalyticShape::gaussian(1.0));
        let g = TimeFrequencyFunction::shape(AxisKind::TimePs, AnalyticShape::gaussian(1.0));
        assert!(matches!(f.pointwise_mul(&g), Err(Error::AxisMismatch { .. })));
        assert!(matches!(f.convolve(&g), Err(Error::AxisMismatch { .. })));
    }

    #[test]
    fn gaussian_convolution_closed_form_matches_grid() {
        let a = AnalyticShape::gaussian(0.5).centered_at(0.3).modulate(0.4);
        let b = AnalyticShape::gaussian(0.7).centered_at(-0.1).modulate(0.4);
        let closed =
            TimeFrequencyFunction::shape(W, a.clone()).convolve(&TimeFrequencyFunction::shape(W, b.clone())).unwrap();
        assert!(matches!(closed.repr, Repr::Shape(_)));
        let spec = GridSpec::centered(0.0, 0.005, 4001).unwrap();
        let ga = TimeFrequencyFunction::grid(TimeFrequencyFunction::shape(W, a).sample(spec));
        let gb = TimeFrequencyFunction::grid(TimeFrequencyFunction::shape(W, b).sample(spec));
        let num = ga.convolve(&gb).unwrap();
        for &x in &[-0.8, 0.0, 0.2, 1.1] {
            assert!((num.eval(x) - closed.eval(x)).norm() < 1e-8, "x={x}");
        }
    }

    #[test]
    fn convolution_theorem_on_shapes() {
        // F[f * g] = sqrt(2 pi) F[f] F[g]
        let f = TimeFrequencyFunction::shape(W, AnalyticShape::gaussian(0.4).centered_at(0.2));
        let g = TimeFrequencyFunction::shape(W, AnalyticShape::gaussian(0.9).centered_at(-0.5));
        let lhs = f.convolve(&g).unwrap().fourier().unwrap();
        let rhs = f.fourier().unwrap().pointwise_mul(&g.fourier().unwrap()).unwrap();
        for &t in &[-1.0, 0.0, 0.7, 2.0] {
            assert!((lhs.eval(t) - (2.0 * PI).sqrt() * rhs.eval(t)).norm() < 1e-13);
        }
    }

    #[test]
    fn comb_convolved_with_shape_puts_shape_on_each_line() {
        let c = CombFunction::dirac(1.0, 0.0, 10).unwrap();
        let g = AnalyticShape::gaussian(0.05);
        let f = TimeFrequencyFunction::comb(W, c).convolve(&TimeFrequencyFunction::shape(W, g.clone())).unwrap();
        assert!((f.eval(3.0) - g.eval(0.0)).norm() < 1e-12);
        assert!(f.eval(3.5).norm() < 1e-12);
    }

    #[test]
    fn lorentzian_fallback_product_goes_to_grid() {
        let f = TimeFrequencyFunction::shape(W, AnalyticShape::lorentzian(1.0));
        let g = TimeFrequencyFunction::shape(W, AnalyticShape::rect(2.0));
        let p = f.pointwise_mul(&g).unwrap();
        assert!(matches!(p.repr, Repr::Grid(_)));
        assert!((p.eval(0.5) - f.eval(0.5)).norm() < 1e-6);
    }
}
