// Copyright 2026 TFGKP Contributors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{AxisKind, CombFunction, GridSpec, TimeFrequencyFunction};
use crate::{Error, Result};

/// Sign of the DFT phase on the left-hand side of the comb identity
/// `sum_k exp(s i 2 pi j k / d) T_{k xbar/d}(C_xbar) = M_{2 pi j/xbar}(C_{xbar/d})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DftSign {
    /// `s = -1`. Only equals the right-hand side when `2 j = 0 mod d`,
    /// because `T_{k xbar/d}` moves lines to `-k xbar/d`.
    Printed,
    /// `s = +1`, which holds for every `j`.
    Consistent,
}

impl DftSign {
    fn value(self) -> f64 {
        match self {
            DftSign::Printed => -1.0,
            DftSign::Consistent => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub d: usize,
    pub j: usize,
    pub sign: DftSign,
    /// Max pointwise deviation between the mollified sides.
    pub max_deviation: f64,
    /// Max modulus of either side, for scale.
    pub max_value: f64,
}

/// Whether the printed sign coincides with the consistent one.
pub fn printed_sign_holds(d: usize, j: usize) -> bool {
    (2 * j).is_multiple_of(d)
}

/// Evaluates both sides of the comb DFT identity on `[-truncation xbar,
/// truncation xbar]` with Dirac lines mollified identically, and returns the
/// max pointwise deviation.
pub fn comb_dft_identity_check(
    d: usize,
    j: usize,
    xbar: f64,
    truncation: usize,
    sign: DftSign,
) -> Result<IdentityReport> {
    if d == 0 {
        return Err(crate::invalid("d must be at least 1"));
    }
    if j >= d {
        return Err(Error::IndexOutOfRange { index: j, dim: d });
    }
    if truncation == 0 {
        return Err(crate::invalid("truncation must be positive"));
    }
    let axis = AxisKind::AngularFrequency;
    let t = truncation as i64;
    let margin = 2;
    let base = CombFunction::dirac(xbar, 0.0, t + margin)?;
    let mut terms = Vec::with_capacity(d);
    for k in 0..d {
        let phase = Complex64::from_polar(1.0, sign.value() * 2.0 * PI * (j * k) as f64 / d as f64);
        let shifted = base.translate(k as f64 * xbar / d as f64).scaled(phase);
        terms.push(TimeFrequencyFunction::comb(axis, shifted));
    }
    let lhs = TimeFrequencyFunction::sum(terms)?;
    let fine = CombFunction::dirac(xbar / d as f64, 0.0, (t + margin) * d as i64)?;
    let rhs = TimeFrequencyFunction::comb(axis, fine).modulate(2.0 * PI * j as f64 / xbar);

    let per_line = 32;
    let step = xbar / (d * per_line) as f64;
    let len = 2 * truncation * d * per_line + 1;
    let spec = GridSpec::new(-(truncation as f64) * xbar, step, len)?;
    let a = lhs.sample(spec);
    let b = rhs.sample(spec);
    let mut max_deviation = 0.0f64;
    let mut max_value = 0.0f64;
    for (x, y) in a.samples().iter().zip(b.samples()) {
        max_deviation = max_deviation.max((x - y).norm());
        max_value = max_value.max(x.norm()).max(y.norm());
    }
    Ok(IdentityReport { d, j, sign, max_deviation, max_value })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_dimension_one() {
        let r = comb_dft_identity_check(1, 0, 1.0, 4, DftSign::Printed).unwrap();
        assert!(r.max_deviation < 1e-12);
    }

    #[test]
    fn consistent_sign_holds_for_all_j() {
        for d in 1..=4 {
            for j in 0..d {
                let r = comb_dft_identity_check(d, j, 2.5, 4, DftSign::Consistent).unwrap();
                assert!(r.max_deviation < 1e-8 * r.max_value, "d={d} j={j}: {}", r.max_deviation);
            }
        }
    }

    #[test]
    fn printed_sign_fails_exactly_when_2j_nonzero_mod_d() {
        for d in 1..=4 {
            for j in 0..d {
                let r = comb_dft_identity_check(d, j, 1.0, 3, DftSign::Printed).unwrap();
                let ok = r.max_deviation < 1e-8 * r.max_value;
                assert_eq!(ok, printed_sign_holds(d, j), "d={d} j={j}");
            }
        }
    }

    #[test]
    fn rejects_out_of_range_j() {
        assert!(matches!(
            comb_dft_identity_check(3, 3, 1.0, 2, DftSign::Consistent),
            Err(Error::IndexOutOfRange { .. })
        ));
    }
}
