// Copyright 2026 TFGKP Contributors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::GridFunction;

const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

/// Base profile of an [`AnalyticShape`], before scaling, centering,
/// modulation and mirroring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShapeKind {
    /// Gaussian PDF `f_G(x) = (2 pi sigma^2)^(-1/2) exp(-x^2 / 2 sigma^2)`.
    Gaussian { sigma: f64 },
    /// Lorentzian amplitude `f_L(x) = sqrt(gamma/pi) / (gamma - i x)`;
    /// `|f_L|^2` is a Lorentzian PDF with half width `gamma`.
    Lorentzian { gamma: f64 },
    /// One-sided exponential `sqrt(2 gamma) exp(-gamma x)` for `x > 0`, half
    /// that at `x = 0`; the Fourier partner of [`ShapeKind::Lorentzian`].
    CausalExp { gamma: f64 },
    /// Indicator of `[-halfwidth, halfwidth)`.
    Rect { halfwidth: f64 },
    /// `sqrt(2/pi) sin(halfwidth x) / x`; the Fourier partner of `Rect`.
    Sinc { halfwidth: f64 },
    /// Dirac delta. Mollified to a narrow Gaussian when sampled.
    Dirac,
    /// The constant function 1.
    Flat,
    /// Tabulated profile, evaluated by band-limited interpolation.
    Custom(GridFunction),
}

/// `scale * exp(-i x modulation) * base(s (x - center))` with `s = -1` when
/// `mirrored`.
///
/// The set of kinds is closed under translation, modulation, reflection and
/// the Fourier transform, so identities can be checked without sampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticShape {
    pub kind: ShapeKind,
    pub scale: Complex64,
    #[serde(default)]
    pub center: f64,
    #[serde(default)]
    pub modulation: f64,
    #[serde(default)]
    pub mirrored: bool,
}

impl AnalyticShape {
    pub fn new(kind: ShapeKind) -> Self {
        Self { kind, scale: Complex64::new(1.0, 0.0), center: 0.0, modulation: 0.0, mirrored: false }
    }

    pub fn gaussian(sigma: f64) -> Self {
        Self::new(ShapeKind::Gaussian { sigma })
    }

    pub fn lorentzian(gamma: f64) -> Self {
        Self::new(ShapeKind::Lorentzian { gamma })
    }

    pub fn rect(halfwidth: f64) -> Self {
        Self::new(ShapeKind::Rect { halfwidth })
    }

    pub fn dirac() -> Self {
        Self::new(ShapeKind::Dirac)
    }

    pub fn flat() -> Self {
        Self::new(ShapeKind::Flat)
    }

    pub fn constant(c: Complex64) -> Self {
        Self::flat().scaled(c)
    }

    /// Gaussian amplitude whose modulus squared is the Gaussian PDF of
    /// standard deviation `sigma`: `(8 pi sigma^2)^(1/4) f_G(x; sqrt2 sigma)`.
    pub fn gaussian_amplitude(sigma: f64) -> Self {
        Self::gaussian(2f64.sqrt() * sigma).scaled(Complex64::new((8.0 * PI * sigma * sigma).powf(0.25), 0.0))
    }

    pub fn is_dirac(&self) -> bool {
        matches!(self.kind, ShapeKind::Dirac)
    }

    pub fn is_flat(&self) -> bool {
        matches!(self.kind, ShapeKind::Flat)
    }

    pub fn scaled(mut self, k: Complex64) -> Self {
        self.scale *= k;
        self
    }

    pub fn centered_at(mut self, c: f64) -> Self {
        self.center = c;
        self
    }

    // A delta only sees its phase at the support point and a flat shape has
    // no center; keep both in a unique form so mollified samples agree.
    fn canonical(mut self) -> Self {
        match self.kind {
            ShapeKind::Dirac => {
                self.scale *= Complex64::from_polar(1.0, -self.center * self.modulation);
                self.modulation = 0.0;
                self.mirrored = false;
            }
            ShapeKind::Flat => {
                self.center = 0.0;
                self.mirrored = false;
            }
            _ => {}
        }
        self
    }

    /// `x -> f(x + omega)`.
    pub fn translate(&self, omega: f64) -> Self {
        let mut out = self.clone();
        out.scale *= Complex64::from_polar(1.0, -omega * self.modulation);
        out.center -= omega;
        out.canonical()
    }

    /// `x -> exp(-i x tau) f(x)`.
    pub fn modulate(&self, tau: f64) -> Self {
        let mut out = self.clone();
        out.modulation += tau;
        out.canonical()
    }

    /// `x -> f(-x)`.
    pub fn reflect(&self) -> Self {
        let mut out = self.clone();
        out.modulation = -self.modulation;
        out.center = -self.center;
        out.mirrored = !self.mirrored;
        out.canonical()
    }

    fn base(&self, y: f64) -> Complex64 {
        match &self.kind {
            ShapeKind::Gaussian { sigma } => {
                Complex64::new((-(y * y) / (2.0 * sigma * sigma)).exp() / (SQRT_2PI * sigma), 0.0)
            }
            ShapeKind::Lorentzian { gamma } => (gamma / PI).sqrt() / Complex64::new(*gamma, -y),
            ShapeKind::CausalExp { gamma } => {
                // midpoint at the jump, where the Fourier integral converges
                let v = (2.0 * gamma).sqrt() * (-gamma * y).exp();
                if y > 0.0 {
                    Complex64::new(v, 0.0)
                } else if y == 0.0 {
                    Complex64::new(0.5 * v, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            ShapeKind::Rect { halfwidth } => {
                if y >= -halfwidth && y < *halfwidth {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            ShapeKind::Sinc { halfwidth } => {
                let v = if y.abs() < 1e-12 { *halfwidth } else { (halfwidth * y).sin() / y };
                Complex64::new((2.0 / PI).sqrt() * v, 0.0)
            }
            ShapeKind::Dirac => Complex64::new(0.0, 0.0),
            ShapeKind::Flat => Complex64::new(1.0, 0.0),
            ShapeKind::Custom(g) => g.interpolate(y),
        }
    }

    fn phase_factor(&self, x: f64) -> Complex64 {
        self.scale * Complex64::from_polar(1.0, -x * self.modulation)
    }

    fn argument(&self, x: f64) -> f64 {
        if self.mirrored {
            -(x - self.center)
        } else {
            x - self.center
        }
    }

    /// Pointwise value. A Dirac shape evaluates to zero everywhere; use
    /// [`AnalyticShape::eval_mollified`] to sample it.
    pub fn eval(&self, x: f64) -> Complex64 {
        self.phase_factor(x) * self.base(self.argument(x))
    }

    /// Like [`AnalyticShape::eval`], but a Dirac delta is replaced by a
    /// unit-mass Gaussian of standard deviation `width`.
    pub fn eval_mollified(&self, x: f64, width: f64) -> Complex64 {
        if self.is_dirac() {
            let y = x - self.center;
            self.phase_factor(x) * (-(y * y) / (2.0 * width * width)).exp() / (SQRT_2PI * width)
        } else {
            self.eval(x)
        }
    }

    /// Squared L2 norm, `None` for non-normalizable kinds.
    pub fn norm_sqr(&self) -> Option<f64> {
        let s2 = self.scale.norm_sqr();
        let base = match &self.kind {
            ShapeKind::Gaussian { sigma } => 1.0 / (2.0 * sigma * PI.sqrt()),
            ShapeKind::Lorentzian { .. } | ShapeKind::CausalExp { .. } => 1.0,
            ShapeKind::Rect { halfwidth } | ShapeKind::Sinc { halfwidth } => 2.0 * halfwidth,
            ShapeKind::Dirac | ShapeKind::Flat => return None,
            ShapeKind::Custom(g) => g.norm_sqr(),
        };
        Some(s2 * base)
    }

    /// Interval holding the numerically significant part of the shape.
    /// `None` when the shape does not decay (flat).
    pub fn support_hint(&self) -> Option<(f64, f64)> {
        let (lo, hi) = match &self.kind {
            ShapeKind::Gaussian { sigma } => (-12.0 * sigma, 12.0 * sigma),
            ShapeKind::Lorentzian { gamma } => (-400.0 * gamma, 400.0 * gamma),
            ShapeKind::CausalExp { gamma } => (0.0, 40.0 / gamma),
            ShapeKind::Rect { halfwidth } => (-halfwidth, *halfwidth),
            ShapeKind::Sinc { halfwidth } => (-400.0 / halfwidth, 400.0 / halfwidth),
            ShapeKind::Dirac => (0.0, 0.0),
            ShapeKind::Flat => return None,
            ShapeKind::Custom(g) => (g.origin(), g.origin() + g.step() * (g.len() - 1) as f64),
        };
        let (lo, hi) = if self.mirrored { (-hi, -lo) } else { (lo, hi) };
        Some((lo + self.center, hi + self.center))
    }

    /// True for peaks whose spectral sums converge fast enough to sample
    /// directly (not the algebraic tails of Lorentzian or sinc lines).
    pub fn is_compact_peak(&self) -> bool {
        self.is_compact()
    }

    /// True when the shape is localized enough that far-away samples can be
    /// skipped when summing shifted copies.
    pub(crate) fn is_compact(&self) -> bool {
        matches!(
            self.kind,
            ShapeKind::Gaussian { .. } | ShapeKind::Rect { .. } | ShapeKind::Dirac | ShapeKind::CausalExp { .. }
        )
    }

    /// Fourier transform with `F(tau) = (2 pi)^(-1/2) int f(x) exp(-i x tau) dx`.
    pub fn fourier(&self) -> Self {
        // FT[b] = scale_b * kind_b(s_b y); combined with our own center,
        // modulation and mirror via FT[e^{-ixm} b(s(x-c))](t) = e^{-ic(t+m)} B(s(t+m)).
        let (kind_b, scale_b, mirror_b) = match &self.kind {
            ShapeKind::Gaussian { sigma } => (ShapeKind::Gaussian { sigma: 1.0 / sigma }, 1.0 / sigma, false),
            ShapeKind::Lorentzian { gamma } => (ShapeKind::CausalExp { gamma: *gamma }, 1.0, false),
            ShapeKind::CausalExp { gamma } => (ShapeKind::Lorentzian { gamma: *gamma }, 1.0, true),
            ShapeKind::Rect { halfwidth } => (ShapeKind::Sinc { halfwidth: *halfwidth }, 1.0, false),
            ShapeKind::Sinc { halfwidth } => (ShapeKind::Rect { halfwidth: *halfwidth }, 1.0, false),
            ShapeKind::Dirac => (ShapeKind::Flat, 1.0 / SQRT_2PI, false),
            ShapeKind::Flat => (ShapeKind::Dirac, SQRT_2PI, false),
            ShapeKind::Custom(g) => (ShapeKind::Custom(g.fourier()), 1.0, false),
        };
        Self {
            kind: kind_b,
            scale: self.scale * scale_b * Complex64::from_polar(1.0, -self.center * self.modulation),
            center: -self.modulation,
            modulation: self.center,
            mirrored: self.mirrored ^ mirror_b,
        }
        .canonical()
    }

    /// Inverse transform, `f(x) = (2 pi)^(-1/2) int F(tau) exp(i x tau) dtau`.
    pub fn inverse_fourier(&self) -> Self {
        self.fourier().reflect()
    }

    /// Closed-form pointwise product where one exists.
    pub fn try_mul(&self, other: &Self) -> Option<Self> {
        if other.is_flat() {
            let mut out = self.clone();
            out.scale *= other.scale;
            out.modulation += other.modulation;
            return Some(out);
        }
        if self.is_flat() {
            return other.try_mul(self);
        }
        if self.is_dirac() && !other.is_dirac() {
            let mut out = self.clone();
            out.scale *= other.eval(self.center) * Complex64::from_polar(1.0, -self.center * self.modulation);
            out.modulation = 0.0;
            return Some(out);
        }
        if other.is_dirac() && !self.is_dirac() {
            return other.try_mul(self);
        }
        if let (ShapeKind::Gaussian { sigma: s1 }, ShapeKind::Gaussian { sigma: s2 }) = (&self.kind, &other.kind) {
            let v1 = s1 * s1;
            let v2 = s2 * s2;
            let vs = v1 + v2;
            let dc = self.center - other.center;
            let k = (-(dc * dc) / (2.0 * vs)).exp() / (2.0 * PI * vs).sqrt();
            return Some(Self {
                kind: ShapeKind::Gaussian { sigma: (v1 * v2 / vs).sqrt() },
                scale: self.scale * other.scale * k,
                center: (self.center * v2 + other.center * v1) / vs,
                modulation: self.modulation + other.modulation,
                mirrored: false,
            });
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;

    fn integrate_sqr(s: &AnalyticShape, lo: f64, hi: f64) -> f64 {
        quad::integrate(|x| s.eval(x).norm_sqr(), lo, hi, 1e-13).value
    }

    #[test]
    fn gaussian_pdf_has_unit_mass() {
        let g = AnalyticShape::gaussian(1.3);
        let m = quad::integrate(|x| g.eval(x).re, -20.0, 20.0, 1e-13).value;
        assert!((m - 1.0).abs() < 1e-9);
    }

    #[test]
    fn lorentzian_amplitude_is_normalized() {
        let l = AnalyticShape::lorentzian(0.2);
        let m = quad::integrate_real_line(|x| l.eval(x).norm_sqr(), 0.0, 0.2, 1e-13).value;
        assert!((m - 1.0).abs() < 1e-9);
        assert!((l.norm_sqr().unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gaussian_amplitude_squares_to_pdf() {
        // |(8 pi s^2)^(1/4) f_G(x; sqrt2 s)|^2 is the Gaussian PDF of std s
        let s = 0.8;
        let a = AnalyticShape::gaussian_amplitude(s);
        let pdf = AnalyticShape::gaussian(s);
        for &x in &[-2.0, -0.3, 0.0, 0.9, 3.1] {
            assert!((a.eval(x).norm_sqr() - pdf.eval(x).re).abs() < 1e-14);
        }
        assert!((integrate_sqr(&a, -20.0, 20.0) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn translate_moves_peak_to_negative_shift() {
        let g = AnalyticShape::gaussian(1.0).translate(2.0);
        assert!(g.eval(-2.0).norm() > g.eval(-1.9).norm());
        assert!(g.eval(-2.0).norm() > g.eval(-2.1).norm());
    }

    #[test]
    fn fourier_matches_direct_quadrature() {
        let shapes = [
            AnalyticShape::gaussian(0.7).centered_at(0.4).modulate(-1.1).scaled(Complex64::new(0.3, 0.8)),
            AnalyticShape::rect(1.2).centered_at(0.1).modulate(0.6),
            AnalyticShape::new(ShapeKind::CausalExp { gamma: 0.9 }).centered_at(0.3).reflect(),
        ];
        for s in &shapes {
            let ft = s.fourier();
            for &tau in &[-1.7, -0.2, 0.0, 0.5, 2.3] {
                let re = quad::integrate_real_line(
                    |x| (s.eval(x) * Complex64::from_polar(1.0, -x * tau)).re,
                    0.0,
                    1.0,
                    1e-12,
                )
                .value;
                let im = quad::integrate_real_line(
                    |x| (s.eval(x) * Complex64::from_polar(1.0, -x * tau)).im,
                    0.0,
                    1.0,
                    1e-12,
                )
                .value;
                let direct = Complex64::new(re, im) / SQRT_2PI;
                assert!((direct - ft.eval(tau)).norm() < 2e-6, "{s:?} tau={tau}: {direct} vs {}", ft.eval(tau));
            }
        }
    }

    #[test]
    fn inverse_fourier_round_trip() {
        let s = AnalyticShape::lorentzian(0.3).centered_at(1.0).modulate(0.25);
        let back = s.fourier().inverse_fourier();
        for &x in &[-1.0, 0.0, 0.7, 1.0, 2.5] {
            assert!((back.eval(x) - s.eval(x)).norm() < 1e-14);
        }
    }

    #[test]
    fn gaussian_product_closed_form() {
        let a = AnalyticShape::gaussian(0.6).centered_at(0.3).modulate(0.2);
        let b = AnalyticShape::gaussian(1.1).centered_at(-0.5).modulate(-0.7);
        let p = a.try_mul(&b).unwrap();
        for &x in &[-1.0, 0.0, 0.4, 1.3] {
            assert!((p.eval(x) - a.eval(x) * b.eval(x)).norm() < 1e-14);
        }
        assert!(AnalyticShape::lorentzian(1.0).try_mul(&AnalyticShape::rect(1.0)).is_none());
    }
}
