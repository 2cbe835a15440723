// Copyright 2026 TFGKP Contributors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::AxisKind;
use crate::{invalid, Error, Result};

/// Default number of samples for grid fallbacks.
pub const DEFAULT_GRID_POINTS: usize = 1 << 14;

// Kaiser-windowed sinc: half width in samples and window shape. Exact on
// nodes, ~1e-14 for functions sampled well below Nyquist.
const KERNEL_HALF: i64 = 16;
const KAISER_BETA: f64 = 30.0;

/// Uniform sampling `x_n = origin + n * step`, `n = 0..len`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin: f64,
    pub step: f64,
    pub len: usize,
}

impl GridSpec {
    pub fn new(origin: f64, step: f64, len: usize) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) || len < 2 || !origin.is_finite() {
            return Err(invalid(format!("grid needs step > 0 and len >= 2 (step={step}, len={len})")));
        }
        Ok(Self { origin, step, len })
    }

    /// `len` points covering `[lo, hi]`.
    pub fn covering(lo: f64, hi: f64, len: usize) -> Result<Self> {
        if !(hi > lo) {
            return Err(invalid(format!("empty interval [{lo}, {hi}]")));
        }
        Self::new(lo, (hi - lo) / (len - 1) as f64, len)
    }

    /// Grid of `len` points centered on `center`, `x_0 = center - len/2 * step`.
    pub fn centered(center: f64, step: f64, len: usize) -> Result<Self> {
        Self::new(center - (len / 2) as f64 * step, step, len)
    }

    pub fn x(&self, n: usize) -> f64 {
        self.origin + n as f64 * self.step
    }

    pub fn end(&self) -> f64 {
        self.x(self.len - 1)
    }

    /// Grid of the Fourier-conjugate variable, centered at zero.
    pub fn conjugate(&self) -> Self {
        let step = 2.0 * PI / (self.len as f64 * self.step);
        Self { origin: -((self.len / 2) as f64) * step, step, len: self.len }
    }
}

/// Sampled complex function on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    spec: GridSpec,
    axis: AxisKind,
    samples: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(spec: GridSpec, axis: AxisKind, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != spec.len {
            return Err(invalid(format!("{} samples for a grid of {}", samples.len(), spec.len)));
        }
        Ok(Self { spec, axis, samples })
    }

    pub fn from_fn(spec: GridSpec, axis: AxisKind, f: impl Fn(f64) -> Complex64) -> Self {
        let samples = (0..spec.len).map(|n| f(spec.x(n))).collect();
        Self { spec, axis, samples }
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }
    pub fn axis(&self) -> AxisKind {
        self.axis
    }
    pub fn origin(&self) -> f64 {
        self.spec.origin
    }
    pub fn step(&self) -> f64 {
        self.spec.step
    }
    pub fn len(&self) -> usize {
        self.spec.len
    }
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }
    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }
    pub fn x(&self, n: usize) -> f64 {
        self.spec.x(n)
    }

    #[cfg(test)]
    pub(crate) fn with_axis(mut self, axis: AxisKind) -> Self {
        self.axis = axis;
        self
    }

    /// `step * sum |f_n|^2`.
    pub fn norm_sqr(&self) -> f64 {
        self.spec.step * self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>()
    }

    /// `step * sum conj(f_n) g_n` after resampling `other` onto this grid.
    pub fn inner(&self, other: &GridFunction) -> Complex64 {
        let g = other.resample(self.spec);
        self.spec.step * self.samples.iter().zip(g.samples.iter()).map(|(a, b)| a.conj() * b).sum::<Complex64>()
    }

    /// Band-limited (Kaiser-windowed sinc) interpolation; exact on nodes and
    /// zero outside the sampled range.
    pub fn interpolate(&self, x: f64) -> Complex64 {
        let u = (x - self.spec.origin) / self.spec.step;
        let n = self.spec.len as i64;
        if u < -0.5 || u > (n - 1) as f64 + 0.5 || !u.is_finite() {
            return Complex64::new(0.0, 0.0);
        }
        let k = u.round();
        if (u - k).abs() < 1e-9 {
            let i = (k as i64).clamp(0, n - 1) as usize;
            return self.samples[i];
        }
        let base = u.floor() as i64;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in (base - KERNEL_HALF + 1)..=(base + KERNEL_HALF) {
            if i < 0 || i >= n {
                continue;
            }
            let t = u - i as f64;
            acc += self.samples[i as usize] * kaiser_sinc(t);
        }
        acc
    }

    /// Samples onto another grid. Aligned grids are copied exactly.
    pub fn resample(&self, spec: GridSpec) -> GridFunction {
        if (spec.step - self.spec.step).abs() <= 1e-12 * self.spec.step {
            let shift = (spec.origin - self.spec.origin) / self.spec.step;
            if (shift - shift.round()).abs() < 1e-9 {
                let s = shift.round() as i64;
                let samples = (0..spec.len as i64)
                    .map(|n| {
                        let i = n + s;
                        if i >= 0 && (i as usize) < self.spec.len {
                            self.samples[i as usize]
                        } else {
                            Complex64::new(0.0, 0.0)
                        }
                    })
                    .collect();
                return GridFunction { spec, axis: self.axis, samples };
            }
        }
        GridFunction::from_fn(spec, self.axis, |x| self.interpolate(x))
    }

    pub fn scaled(mut self, k: Complex64) -> Self {
        self.samples.iter_mut().for_each(|s| *s *= k);
        self
    }

    /// `x -> f(x + omega)`: the grid moves, samples stay.
    pub fn translate(&self, omega: f64) -> Self {
        let mut out = self.clone();
        out.spec.origin -= omega;
        out
    }

    /// `x -> exp(-i x tau) f(x)`.
    pub fn modulate(&self, tau: f64) -> Self {
        let mut out = self.clone();
        for (n, s) in out.samples.iter_mut().enumerate() {
            *s *= Complex64::from_polar(1.0, -self.spec.x(n) * tau);
        }
        out
    }

    /// `x -> f(-x)`.
    pub fn reflect(&self) -> Self {
        let mut samples = self.samples.clone();
        samples.reverse();
        let spec = GridSpec { origin: -self.spec.end(), ..self.spec };
        GridFunction { spec, axis: self.axis, samples }
    }

    pub fn pointwise_mul(&self, other: &GridFunction) -> Result<Self> {
        if self.axis != other.axis {
            return Err(Error::AxisMismatch { left: self.axis, right: other.axis });
        }
        let g = other.resample(self.spec);
        let samples = self.samples.iter().zip(g.samples.iter()).map(|(a, b)| a * b).collect();
        Ok(GridFunction { spec: self.spec, axis: self.axis, samples })
    }

    /// Linear convolution `(f * g)(x) = int f(y) g(x - y) dy` by zero-padded
    /// FFT. `other` is resampled to this step first.
    pub fn convolve(&self, other: &GridFunction) -> Result<Self> {
        if self.axis != other.axis {
            return Err(Error::AxisMismatch { left: self.axis, right: other.axis });
        }
        let h = self.spec.step;
        let g = if (other.spec.step - h).abs() <= 1e-12 * h {
            other.clone()
        } else {
            let len = ((other.spec.end() - other.spec.origin) / h).ceil() as usize + 1;
            other.resample(GridSpec::new(other.spec.origin, h, len.max(2))?)
        };
        let out_len = self.len() + g.len() - 1;
        let n = out_len.next_power_of_two();
        let mut planner = FftPlanner::<f64>::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let mut a = self.samples.clone();
        a.resize(n, Complex64::new(0.0, 0.0));
        let mut b = g.samples.clone();
        b.resize(n, Complex64::new(0.0, 0.0));
        fwd.process(&mut a);
        fwd.process(&mut b);
        for (x, y) in a.iter_mut().zip(b.iter()) {
            *x *= y;
        }
        inv.process(&mut a);
        a.truncate(out_len);
        let k = h / n as f64;
        a.iter_mut().for_each(|s| *s *= k);
        let spec = GridSpec::new(self.spec.origin + g.spec.origin, h, out_len)?;
        Ok(GridFunction { spec, axis: self.axis, samples: a })
    }

    fn transform(&self, out: GridSpec, sign: f64) -> Vec<Complex64> {
        // out_k = h/sqrt(2pi) sum_n f_n exp(sign i x_n y_k) with y_k = q + k dy and
        // h dy = 2 pi / N, so the sum over n is a plain DFT after pre/post phases.
        let n = self.spec.len;
        let (o, h) = (self.spec.origin, self.spec.step);
        let (q, dy) = (out.origin, out.step);
        let mut buf: Vec<Complex64> = self
            .samples
            .iter()
            .enumerate()
            .map(|(i, s)| s * Complex64::from_polar(1.0, sign * i as f64 * h * q))
            .collect();
        let mut planner = FftPlanner::<f64>::new();
        let plan = if sign < 0.0 { planner.plan_fft_forward(n) } else { planner.plan_fft_inverse(n) };
        plan.process(&mut buf);
        let k0 = h / (2.0 * PI).sqrt();
        for (k, s) in buf.iter_mut().enumerate() {
            *s *= k0 * Complex64::from_polar(1.0, sign * o * (q + k as f64 * dy));
        }
        buf
    }

    /// Forward transform onto the centered conjugate grid.
    pub fn fourier(&self) -> Self {
        let spec = self.spec.conjugate();
        GridFunction { spec, axis: self.axis.conjugate(), samples: self.transform(spec, -1.0) }
    }

    /// Inverse transform onto the centered conjugate grid.
    pub fn inverse_fourier(&self) -> Self {
        let spec = self.spec.conjugate();
        GridFunction { spec, axis: self.axis.conjugate(), samples: self.transform(spec, 1.0) }
    }

    /// Forward transform onto a conjugate grid starting at `origin`.
    pub fn fourier_onto(&self, origin: f64) -> Self {
        let spec = GridSpec { origin, ..self.spec.conjugate() };
        GridFunction { spec, axis: self.axis.conjugate(), samples: self.transform(spec, -1.0) }
    }

    /// Inverse transform onto a conjugate grid starting at `origin`.
    pub fn inverse_fourier_onto(&self, origin: f64) -> Self {
        let spec = GridSpec { origin, ..self.spec.conjugate() };
        GridFunction { spec, axis: self.axis.conjugate(), samples: self.transform(spec, 1.0) }
    }

    /// Writes `x,re,im` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["x", "re", "im"])?;
        for (n, s) in self.samples.iter().enumerate() {
            out.write_record([format!("{:.12e}", self.spec.x(n)), format!("{:.12e}", s.re), format!("{:.12e}", s.im)])?;
        }
        out.flush()?;
        Ok(())
    }
}

fn bessel_i0(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

fn kaiser_sinc(t: f64) -> f64 {
    let a = KERNEL_HALF as f64;
    if t.abs() >= a {
        return 0.0;
    }
    let pt = PI * t;
    let sinc = if pt.abs() < 1e-12 { 1.0 } else { pt.sin() / pt };
    let r = 1.0 - (t / a) * (t / a);
    sinc * bessel_i0(KAISER_BETA * r.sqrt()) / bessel_i0(KAISER_BETA)
}
