// Copyright 2026 TFGKP Contributors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::GridSpec;
use super::shape::AnalyticShape;
use crate::{Error, Result};

/// Relative line mass below which lines are dropped by adaptive truncation.
pub const DEFAULT_MASS_TOL: f64 = 1e-20;

/// Number of lines kept when nothing decays (flat weights and envelope).
pub const DEFAULT_FLAT_LINES: i64 = 64;

const MAX_LINES: i64 = 1 << 16;

/// `envelope(x) * sum_n weights(x_n) * peak(x - x_n)` with line centers
/// `x_n = offset + n * period` for `n` in `n_min..=n_max`.
///
/// A pure Dirac comb has flat weights and envelope and a Dirac peak.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombFunction {
    pub period: f64,
    pub offset: f64,
    pub n_min: i64,
    pub n_max: i64,
    pub weights: AnalyticShape,
    pub peak: AnalyticShape,
    pub envelope: AnalyticShape,
}

impl CombFunction {
    /// `sum_n delta(x - offset - n period)` for `|n| <= half_lines`.
    pub fn dirac(period: f64, offset: f64, half_lines: i64) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(crate::invalid(format!("comb period must be positive, got {period}")));
        }
        Ok(Self {
            period,
            offset,
            n_min: -half_lines,
            n_max: half_lines,
            weights: AnalyticShape::flat(),
            peak: AnalyticShape::dirac(),
            envelope: AnalyticShape::flat(),
        })
    }

    pub fn center(&self, n: i64) -> f64 {
        self.offset + n as f64 * self.period
    }

    pub fn line_count(&self) -> usize {
        (self.n_max - self.n_min + 1).max(0) as usize
    }

    /// Complex weight of line `n`, including the envelope for Dirac peaks.
    pub fn line_weight(&self, n: i64) -> Complex64 {
        let x = self.center(n);
        let w = self.weights.eval(x);
        if self.peak.is_dirac() {
            w * self.envelope.eval(x + self.peak.center)
        } else {
            w
        }
    }

    pub fn scaled(mut self, k: Complex64) -> Self {
        self.envelope.scale *= k;
        self
    }

    /// `x -> f(x + omega)`.
    pub fn translate(&self, omega: f64) -> Self {
        Self {
            offset: self.offset - omega,
            weights: self.weights.translate(omega),
            envelope: self.envelope.translate(omega),
            ..self.clone()
        }
    }

    /// `x -> exp(-i x tau) f(x)`. The phase is split between line weights
    /// and peaks, which keeps Dirac combs exact.
    pub fn modulate(&self, tau: f64) -> Self {
        Self { weights: self.weights.modulate(tau), peak: self.peak.modulate(tau), ..self.clone() }
    }

    /// `x -> f(-x)`.
    pub fn reflect(&self) -> Self {
        Self {
            period: self.period,
            offset: -self.offset,
            n_min: -self.n_max,
            n_max: -self.n_min,
            weights: self.weights.reflect(),
            peak: self.peak.reflect(),
            envelope: self.envelope.reflect(),
        }
    }

    /// Moves a non-flat envelope into the line weights when the peak is a
    /// delta, where only the envelope values at the centers matter.
    pub fn fold_envelope(&self) -> Result<Self> {
        if self.envelope.is_flat() || !self.peak.is_dirac() {
            return Ok(self.clone());
        }
        let env_at_centers = self.envelope.translate(self.peak.center);
        let weights = self.weights.try_mul(&env_at_centers).ok_or_else(|| {
            Error::Unsupported(format!(
                "cannot fold {:?} envelope into {:?} weights",
                self.envelope.kind, self.weights.kind
            ))
        })?;
        Ok(Self { weights, envelope: AnalyticShape::flat(), ..self.clone() })
    }

    /// Pointwise product with a shape, in closed form when possible.
    pub fn try_mul_shape(&self, s: &AnalyticShape) -> Option<Self> {
        if self.peak.is_dirac() {
            let at_centers = s.translate(self.peak.center);
            let folded = self.fold_envelope().ok()?;
            return folded.weights.try_mul(&at_centers).map(|weights| Self { weights, ..folded });
        }
        self.envelope.try_mul(s).map(|envelope| Self { envelope, ..self.clone() })
    }

    /// Value at `x` with Dirac peaks replaced by Gaussians of std `width`.
    pub fn eval_mollified(&self, x: f64, width: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for n in self.n_min..=self.n_max {
            let c = self.center(n);
            acc += self.line_weight(n) * self.peak.eval_mollified(x - c, width);
        }
        if self.peak.is_dirac() {
            acc
        } else {
            acc * self.envelope.eval(x)
        }
    }

    /// Samples onto `spec`, mollifying Dirac peaks to std `width`.
    pub fn sample(&self, spec: GridSpec, width: f64) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); spec.len];
        let reach = if self.peak.is_compact() {
            self.peak.support_hint().map(|(lo, hi)| (lo - 10.0 * width, hi + 10.0 * width))
        } else {
            None
        };
        let dirac = self.peak.is_dirac();
        for n in self.n_min..=self.n_max {
            let c = self.center(n);
            let w = if dirac { self.line_weight(n) } else { self.weights.eval(c) };
            if w == Complex64::new(0.0, 0.0) {
                continue;
            }
            let (i0, i1) = match reach {
                Some((lo, hi)) => {
                    let a = ((c + lo - spec.origin) / spec.step).floor().max(0.0);
                    let b = ((c + hi - spec.origin) / spec.step).ceil().min((spec.len - 1) as f64);
                    if b < a {
                        continue;
                    }
                    (a as usize, b as usize)
                }
                None => (0, spec.len - 1),
            };
            for (i, v) in out.iter_mut().enumerate().take(i1 + 1).skip(i0) {
                *v += w * self.peak.eval_mollified(spec.x(i) - c, width);
            }
        }
        // with Dirac peaks the envelope is already inside line_weight
        if !dirac {
            for (i, v) in out.iter_mut().enumerate() {
                *v *= self.envelope.eval(spec.x(i));
            }
        }
        out
    }

    fn line_mass(&self, n: i64) -> f64 {
        let x = self.center(n);
        let env = if self.peak.is_dirac() { x + self.peak.center } else { x };
        (self.weights.eval(x) * self.envelope.eval(env)).norm_sqr()
    }

    /// Re-chooses `n_min..=n_max` so the dropped lines carry less than `tol`
    /// of the total line mass. Combs without decaying weights or envelope
    /// keep their range.
    pub fn truncate_adaptive(&self, tol: f64) -> Self {
        let decaying = [&self.weights, &self.envelope].into_iter().find(|s| !s.is_flat());
        let Some(shape) = decaying else {
            return self.clone();
        };
        let c = match shape.support_hint() {
            Some((lo, hi)) => 0.5 * (lo + hi),
            None => return self.clone(),
        };
        let n0 = ((c - self.offset) / self.period).round() as i64;
        let (mut lo, mut hi) = (n0, n0);
        let mut total = self.line_mass(n0);
        // grow until several consecutive lines on each side fall below tol
        let mut quiet_lo = 0;
        let mut quiet_hi = 0;
        while (quiet_lo < 8 || quiet_hi < 8) && hi - lo < MAX_LINES {
            let mh = self.line_mass(hi + 1);
            let ml = self.line_mass(lo - 1);
            hi += 1;
            lo -= 1;
            total += mh + ml;
            let limit = tol * total.max(f64::MIN_POSITIVE);
            quiet_hi = if mh <= limit { quiet_hi + 1 } else { 0 };
            quiet_lo = if ml <= limit { quiet_lo + 1 } else { 0 };
        }
        // trim from both ends while the dropped mass stays below tol
        let budget = tol * total;
        let mut dropped = 0.0;
        loop {
            let ml = self.line_mass(lo);
            let mh = self.line_mass(hi);
            let (m, is_lo) = if ml <= mh { (ml, true) } else { (mh, false) };
            if hi <= lo || dropped + m > budget {
                break;
            }
            dropped += m;
            if is_lo {
                lo += 1;
            } else {
                hi -= 1;
            }
        }
        Self { n_min: lo, n_max: hi, ..self.clone() }
    }

    /// Fourier transform. Supported when the envelope is flat (or foldable
    /// into the weights) or the weights are flat.
    pub fn fourier(&self) -> Result<Self> {
        let f = self.fold_envelope().unwrap_or_else(|_| self.clone());
        let p = f.period;
        let o = f.offset;
        let period = 2.0 * PI / p;
        let k = (2.0 * PI).sqrt() / p;
        let out = if f.envelope.is_flat() {
            let half = ((f.n_max - f.n_min) / 2).max(1);
            let inner = CombFunction {
                period,
                offset: 0.0,
                n_min: -half,
                n_max: half,
                weights: AnalyticShape::constant(Complex64::new(k, 0.0)).modulate(o),
                peak: f.weights.fourier(),
                envelope: f.peak.fourier(),
            };
            inner.scaled(f.envelope.scale).translate(f.envelope.modulation)
        } else if f.weights.is_flat() {
            let m = f.weights.modulation;
            let line = AnalyticShape::constant(f.weights.scale * k * Complex64::from_polar(1.0, -m * o)).modulate(o);
            let weights = f.peak.fourier().try_mul(&line).expect("flat product always closes");
            let half = ((f.n_max - f.n_min) / 2).max(1);
            let n0 = (m / period).round() as i64;
            CombFunction {
                period,
                offset: -m,
                n_min: n0 - half,
                n_max: n0 + half,
                weights,
                peak: f.envelope.fourier(),
                envelope: AnalyticShape::flat(),
            }
        } else {
            return Err(Error::Unsupported(format!(
                "comb transform with {:?} weights and {:?} envelope",
                f.weights.kind, f.envelope.kind
            )));
        };
        Ok(out.truncate_adaptive(DEFAULT_MASS_TOL))
    }

    pub fn inverse_fourier(&self) -> Result<Self> {
        Ok(self.fourier()?.reflect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_comb() -> CombFunction {
        CombFunction {
            period: 1.3,
            offset: 0.2,
            n_min: -40,
            n_max: 40,
            weights: AnalyticShape::gaussian(3.0).centered_at(0.5),
            peak: AnalyticShape::gaussian(0.1),
            envelope: AnalyticShape::flat(),
        }
    }

    #[test]
    fn translate_shifts_values() {
        let c = gaussian_comb();
        let t = c.translate(0.37);
        for &x in &[-1.0, 0.0, 0.3, 2.2] {
            assert!((t.eval_mollified(x, 0.01) - c.eval_mollified(x + 0.37, 0.01)).norm() < 1e-13);
        }
    }

    #[test]
    fn modulate_and_reflect_act_pointwise() {
        let c = gaussian_comb();
        let m = c.modulate(0.8);
        let r = c.reflect();
        for &x in &[-1.0, 0.0, 0.3, 2.2] {
            let want = Complex64::from_polar(1.0, -0.8 * x) * c.eval_mollified(x, 0.01);
            assert!((m.eval_mollified(x, 0.01) - want).norm() < 1e-13);
            assert!((r.eval_mollified(x, 0.01) - c.eval_mollified(-x, 0.01)).norm() < 1e-13);
        }
    }

    #[test]
    fn truncation_keeps_mass() {
        let c = gaussian_comb().truncate_adaptive(1e-20);
        assert!(c.line_count() < 81);
        assert!(c.n_min < 0 && c.n_max > 0);
    }

    #[test]
    fn sampling_matches_pointwise_evaluation() {
        let c = gaussian_comb();
        let spec = GridSpec::centered(0.0, 0.01, 4000).unwrap();
        let s = c.sample(spec, 0.01);
        for i in (0..spec.len).step_by(311) {
            assert!((s[i] - c.eval_mollified(spec.x(i), 0.01)).norm() < 1e-12);
        }
    }

    #[test]
    fn fourier_of_gaussian_comb_round_trips() {
        let c = gaussian_comb();
        let back = c.fourier().unwrap().inverse_fourier().unwrap();
        for &x in &[-1.0, 0.0, 0.25, 0.6, 2.2] {
            let a = back.eval_mollified(x, 0.01);
            let b = c.eval_mollified(x, 0.01);
            assert!((a - b).norm() < 1e-8, "x={x}: {a} vs {b}");
        }
    }
}
