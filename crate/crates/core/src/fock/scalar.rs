// Copyright 2026 TFGKP Contributors
// SPDX-License-Identifier: Apache-2.0

//! Exact arithmetic in `Q(sqrt2)` and its complex extension, and the
//! [`Amplitude`] trait shared with plain `Complex64`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

pub type Q = Ratio<i128>;

/// `a + b sqrt2` with rational `a`, `b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QSqrt2 {
    pub a: Q,
    pub b: Q,
}

impl QSqrt2 {
    pub fn new(a: Q, b: Q) -> Self {
        Self { a, b }
    }

    pub fn rational(a: Q) -> Self {
        Self { a, b: Q::zero() }
    }

    pub fn int(n: i64) -> Self {
        Self::rational(Q::from_integer(n as i128))
    }

    pub fn zero() -> Self {
        Self::int(0)
    }

    pub fn one() -> Self {
        Self::int(1)
    }

    pub fn sqrt2() -> Self {
        Self { a: Q::zero(), b: Q::one() }
    }

    /// `1 / sqrt2`.
    pub fn inv_sqrt2() -> Self {
        Self { a: Q::zero(), b: Q::new(1, 2) }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        self.a.to_f64().unwrap_or(f64::NAN) + self.b.to_f64().unwrap_or(f64::NAN) * std::f64::consts::SQRT_2
    }

    /// Galois conjugate `a - b sqrt2`.
    pub fn galois(&self) -> Self {
        Self { a: self.a, b: -self.b }
    }

    /// `sqrt(r)` when it lies in the field: `r = s^2` or `r = 2 s^2`.
    pub fn sqrt_of_rational(r: Q) -> Option<Self> {
        if r.is_negative() {
            return None;
        }
        if let Some(s) = rational_sqrt(r) {
            return Some(Self::rational(s));
        }
        rational_sqrt(r / Q::from_integer(2)).map(|s| Self { a: Q::zero(), b: s })
    }

    pub fn signum(&self) -> i32 {
        let sa = sign(&self.a);
        let sb = sign(&self.b);
        if sa == 0 || sb == 0 || sa == sb {
            return if sa != 0 { sa } else { sb };
        }
        // opposite signs: compare a^2 with 2 b^2
        let a2 = self.a * self.a;
        let b2 = self.b * self.b * Q::from_integer(2);
        match a2.cmp(&b2) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => 0,
        }
    }
}

fn sign(q: &Q) -> i32 {
    if q.is_zero() {
        0
    } else if q.is_positive() {
        1
    } else {
        -1
    }
}

fn int_sqrt(n: i128) -> Option<i128> {
    if n < 0 {
        return None;
    }
    let mut r = (n as f64).sqrt() as i128;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    (r * r == n).then_some(r)
}

fn rational_sqrt(r: Q) -> Option<Q> {
    Some(Q::new(int_sqrt(*r.numer())?, int_sqrt(*r.denom())?))
}

impl PartialOrd for QSqrt2 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some((self.clone() - other.clone()).signum().cmp(&0))
    }
}

impl Add for QSqrt2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { a: self.a + o.a, b: self.b + o.b }
    }
}

impl Sub for QSqrt2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self { a: self.a - o.a, b: self.b - o.b }
    }
}

impl Neg for QSqrt2 {
    type Output = Self;
    fn neg(self) -> Self {
        Self { a: -self.a, b: -self.b }
    }
}

impl Mul for QSqrt2 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let two = Q::from_integer(2);
        Self { a: self.a * o.a + two * self.b * o.b, b: self.a * o.b + self.b * o.a }
    }
}

impl Div for QSqrt2 {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let n = o.a * o.a - Q::from_integer(2) * o.b * o.b;
        assert!(!n.is_zero(), "division by zero in Q(sqrt2)");
        let num = self * o.galois();
        Self { a: num.a / n, b: num.b / n }
    }
}

impl fmt::Display for QSqrt2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.a.is_zero(), self.b.is_zero()) {
            (_, true) => write!(f, "{}", self.a),
            (true, false) => write!(f, "{}*sqrt2", self.b),
            (false, false) => {
                if self.b.is_negative() {
                    write!(f, "{} - {}*sqrt2", self.a, -self.b)
                } else {
                    write!(f, "{} + {}*sqrt2", self.a, self.b)
                }
            }
        }
    }
}

/// Complex number with both parts in `Q(sqrt2)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExactComplex {
    pub re: QSqrt2,
    pub im: QSqrt2,
}

impl ExactComplex {
    pub fn new(re: QSqrt2, im: QSqrt2) -> Self {
        Self { re, im }
    }

    pub fn real(re: QSqrt2) -> Self {
        Self { re, im: QSqrt2::zero() }
    }

    pub fn i() -> Self {
        Self { re: QSqrt2::zero(), im: QSqrt2::one() }
    }

    /// `exp(i k pi / 4)`.
    pub fn eighth_root(k: i64) -> Self {
        let h = QSqrt2::inv_sqrt2();
        let z = QSqrt2::zero;
        let o = QSqrt2::one;
        match k.rem_euclid(8) {
            0 => Self::new(o(), z()),
            1 => Self::new(h.clone(), h),
            2 => Self::new(z(), o()),
            3 => Self::new(-h.clone(), h),
            4 => Self::new(-o(), z()),
            5 => Self::new(-h.clone(), -h),
            6 => Self::new(z(), -o()),
            _ => Self::new(h.clone(), -h),
        }
    }

    /// Finds the field element closest to `z` with small denominators.
    pub fn recognize(z: Complex64, tol: f64) -> Option<Self> {
        Some(Self { re: recognize_real(z.re, tol)?, im: recognize_real(z.im, tol)? })
    }
}

/// `x = (p + q sqrt2) / 2^k` with `k <= 6`, `|q| <= 64`.
fn recognize_real(x: f64, tol: f64) -> Option<QSqrt2> {
    if x.abs() < tol {
        return Some(QSqrt2::zero());
    }
    for k in 0..=6 {
        let den = (1i128 << k) as f64;
        for q in -64i128..=64 {
            let p = (x * den - q as f64 * std::f64::consts::SQRT_2).round();
            let v = (p + q as f64 * std::f64::consts::SQRT_2) / den;
            if (v - x).abs() < tol {
                let d = 1i128 << k;
                return Some(QSqrt2::new(Q::new(p as i128, d), Q::new(q, d)));
            }
        }
    }
    None
}

impl Add for ExactComplex {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { re: self.re + o.re, im: self.im + o.im }
    }
}

impl Sub for ExactComplex {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self { re: self.re - o.re, im: self.im - o.im }
    }
}

impl Neg for ExactComplex {
    type Output = Self;
    fn neg(self) -> Self {
        Self { re: -self.re, im: -self.im }
    }
}

impl Mul for ExactComplex {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self {
            re: self.re.clone() * o.re.clone() - self.im.clone() * o.im.clone(),
            im: self.re * o.im + self.im * o.re,
        }
    }
}

impl fmt::Display for ExactComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "i*({})", self.im)
        } else {
            write!(f, "({}) + i*({})", self.re, self.im)
        }
    }
}

/// Ring of amplitudes used by the Fock simulator.
pub trait Amplitude:
    Clone
    + fmt::Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    /// Ordered field for probabilities.
    type Real: Clone
        + fmt::Debug
        + fmt::Display
        + PartialEq
        + PartialOrd
        + Send
        + Sync
        + Add<Output = Self::Real>
        + Sub<Output = Self::Real>
        + Mul<Output = Self::Real>
        + Div<Output = Self::Real>;

    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn conj(&self) -> Self;
    fn norm_sqr(&self) -> Self::Real;
    fn re(&self) -> Self::Real;
    fn is_zero(&self) -> bool;
    fn from_real(r: Self::Real) -> Self;
    fn real_int(n: i64) -> Self::Real;
    fn real_to_f64(r: &Self::Real) -> f64;
    fn real_is_zero(r: &Self::Real) -> bool;
    /// Converts a probability-like input (a visibility) into the field.
    fn real_from_f64(x: f64) -> Result<Self::Real>;
    fn real_from_rational(q: Q) -> Self::Real;
    fn to_c64(&self) -> Complex64;
    /// Converts an element matrix entry; exact mode recognizes it in the field.
    fn from_c64(z: Complex64) -> Result<Self>;
    /// `sqrt(r)` of a rational reflectivity-like value.
    fn sqrt_rational(r: Q) -> Result<Self>;
    /// `exp(-i k theta)` for a phase gate.
    fn phase(theta: f64, k: usize) -> Result<Self>;
    fn inv_sqrt2() -> Self;
}

impl Amplitude for ExactComplex {
    type Real = QSqrt2;
    const EXACT: bool = true;

    fn zero() -> Self {
        Self::real(QSqrt2::zero())
    }
    fn one() -> Self {
        Self::real(QSqrt2::one())
    }
    fn conj(&self) -> Self {
        Self { re: self.re.clone(), im: -self.im.clone() }
    }
    fn norm_sqr(&self) -> QSqrt2 {
        self.re.clone() * self.re.clone() + self.im.clone() * self.im.clone()
    }
    fn re(&self) -> QSqrt2 {
        self.re.clone()
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn from_real(r: QSqrt2) -> Self {
        Self::real(r)
    }
    fn real_int(n: i64) -> QSqrt2 {
        QSqrt2::int(n)
    }
    fn real_to_f64(r: &QSqrt2) -> f64 {
        r.to_f64()
    }
    fn real_is_zero(r: &QSqrt2) -> bool {
        r.is_zero()
    }
    fn real_from_f64(x: f64) -> Result<QSqrt2> {
        // decimal inputs such as 0.98 are taken at face value
        let r = Q::approximate_float(x).ok_or_else(|| Error::NotExact(format!("{x} is not a usable rational")))?;
        if (r.to_f64().unwrap_or(f64::NAN) - x).abs() > 1e-12 {
            return Err(Error::NotExact(format!("{x} has no small rational form")));
        }
        Ok(QSqrt2::rational(r))
    }
    fn real_from_rational(q: Q) -> QSqrt2 {
        QSqrt2::rational(q)
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
    fn from_c64(z: Complex64) -> Result<Self> {
        Self::recognize(z, 1e-9).ok_or_else(|| Error::NotExact(format!("{z} is not in Q(sqrt2, i)")))
    }
    fn sqrt_rational(r: Q) -> Result<Self> {
        QSqrt2::sqrt_of_rational(r)
            .map(Self::real)
            .ok_or_else(|| Error::NotExact(format!("sqrt({r}) is not in Q(sqrt2)")))
    }
    fn phase(theta: f64, k: usize) -> Result<Self> {
        let eighths = theta / std::f64::consts::FRAC_PI_4;
        if (eighths - eighths.round()).abs() > 1e-12 {
            return Err(Error::NotExact(format!("phase {theta} is not a multiple of pi/4")));
        }
        Ok(Self::eighth_root(-(eighths.round() as i64) * k as i64))
    }
    fn inv_sqrt2() -> Self {
        Self::real(QSqrt2::inv_sqrt2())
    }
}

impl Amplitude for Complex64 {
    type Real = f64;
    const EXACT: bool = false;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn norm_sqr(&self) -> f64 {
        Complex64::norm_sqr(self)
    }
    fn re(&self) -> f64 {
        self.re
    }
    fn is_zero(&self) -> bool {
        Complex64::norm_sqr(self) < 1e-30
    }
    fn from_real(r: f64) -> Self {
        Complex64::new(r, 0.0)
    }
    fn real_int(n: i64) -> f64 {
        n as f64
    }
    fn real_to_f64(r: &f64) -> f64 {
        *r
    }
    fn real_is_zero(r: &f64) -> bool {
        r.abs() < 1e-30
    }
    fn real_from_f64(x: f64) -> Result<f64> {
        Ok(x)
    }
    fn real_from_rational(q: Q) -> f64 {
        q.to_f64().unwrap_or(f64::NAN)
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn from_c64(z: Complex64) -> Result<Self> {
        Ok(z)
    }
    fn sqrt_rational(r: Q) -> Result<Self> {
        Ok(Complex64::new(r.to_f64().unwrap_or(f64::NAN).sqrt(), 0.0))
    }
    fn phase(theta: f64, k: usize) -> Result<Self> {
        Ok(Complex64::from_polar(1.0, -theta * k as f64))
    }
    fn inv_sqrt2() -> Self {
        Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_arithmetic() {
        let h = QSqrt2::inv_sqrt2();
        assert_eq!(h.clone() * h.clone(), QSqrt2::rational(Q::new(1, 2)));
        let x = QSqrt2::new(Q::new(3, 4), Q::new(-1, 3));
        let y = QSqrt2::new(Q::new(1, 5), Q::new(2, 7));
        assert_eq!((x.clone() * y.clone()) / y.clone(), x);
        assert!((x.to_f64() - (0.75 - std::f64::consts::SQRT_2 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn ordering_is_exact() {
        // 3 - 2 sqrt2 > 0 but tiny; 1 - sqrt2 < 0
        assert_eq!(QSqrt2::new(Q::from_integer(3), Q::from_integer(-2)).signum(), 1);
        assert_eq!(QSqrt2::new(Q::from_integer(1), Q::from_integer(-1)).signum(), -1);
        assert!(QSqrt2::sqrt2() > QSqrt2::rational(Q::new(141, 100)));
    }

    #[test]
    fn square_roots() {
        assert_eq!(QSqrt2::sqrt_of_rational(Q::new(1, 2)), Some(QSqrt2::inv_sqrt2()));
        assert_eq!(QSqrt2::sqrt_of_rational(Q::new(9, 4)), Some(QSqrt2::rational(Q::new(3, 2))));
        assert_eq!(QSqrt2::sqrt_of_rational(Q::new(1, 3)), None);
    }

    #[test]
    fn eighth_roots_and_recognition() {
        let w = ExactComplex::eighth_root(1);
        assert_eq!(w.clone() * w.clone(), ExactComplex::i());
        let z = Complex64::from_polar(1.0, 3.0 * std::f64::consts::FRAC_PI_4);
        assert_eq!(ExactComplex::recognize(z, 1e-12), Some(ExactComplex::eighth_root(3)));
        assert!(ExactComplex::recognize(Complex64::new(0.3, 0.0), 1e-12).is_none());
    }
}
