// Copyright 2026 TFGKP Contributors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use tfgkp::func::*;

const AXIS: AxisKind = AxisKind::AngularFrequency;

/// Gaussian amplitude or Lorentzian amplitude, offset and phased.
fn shape(lorentz: bool, width: f64, center: f64, phase: f64) -> TimeFrequencyFunction {
    let s = if lorentz { AnalyticShape::lorentzian(width) } else { AnalyticShape::gaussian_amplitude(width) };
    TimeFrequencyFunction::shape(AXIS, s.centered_at(center).scaled(Complex64::from_polar(1.0, phase)))
}

fn arb_fn() -> impl Strategy<Value = TimeFrequencyFunction> {
    (any::<bool>(), 0.5f64..2.0, -1.0f64..1.0, 0.0f64..6.0).prop_map(|(l, w, c, p)| shape(l, w, c, p))
}

fn arb_gauss() -> impl Strategy<Value = TimeFrequencyFunction> {
    (0.5f64..2.0, -1.0f64..1.0, 0.0f64..6.0).prop_map(|(w, c, p)| shape(false, w, c, p))
}

fn grid() -> GridSpec {
    GridSpec::centered(0.0, 0.01, 4001).unwrap()
}

/// `||a - b|| / ||a||` on a common grid.
fn rel(a: &TimeFrequencyFunction, b: &TimeFrequencyFunction, spec: GridSpec) -> f64 {
    let n = a.sample(spec).norm_sqr().sqrt();
    a.l2_distance(b, spec).unwrap() / n
}

const TOL: f64 = 1e-10;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn translation_distributes_over_products(f in arb_fn(), g in arb_fn(), w in -5.0f64..5.0) {
        let lhs = f.pointwise_mul(&g).unwrap().translate(w);
        let rhs = f.translate(w).pointwise_mul(&g.translate(w)).unwrap();
        prop_assert!(rel(&lhs, &rhs, grid()) < TOL);
    }

    #[test]
    fn translation_moves_either_convolution_factor(f in arb_gauss(), g in arb_gauss(), w in -5.0f64..5.0) {
        let lhs = f.convolve(&g).unwrap().translate(w);
        prop_assert!(rel(&lhs, &f.translate(w).convolve(&g).unwrap(), grid()) < TOL);
        prop_assert!(rel(&lhs, &f.convolve(&g.translate(w)).unwrap(), grid()) < TOL);
    }

    #[test]
    fn modulation_moves_either_product_factor(f in arb_fn(), g in arb_fn(), t in -5.0f64..5.0) {
        let lhs = f.pointwise_mul(&g).unwrap().modulate(t);
        prop_assert!(rel(&lhs, &f.modulate(t).pointwise_mul(&g).unwrap(), grid()) < TOL);
        prop_assert!(rel(&lhs, &f.pointwise_mul(&g.modulate(t)).unwrap(), grid()) < TOL);
    }

    #[test]
    fn modulation_distributes_over_convolutions(f in arb_gauss(), g in arb_gauss(), t in -5.0f64..5.0) {
        let lhs = f.convolve(&g).unwrap().modulate(t);
        let rhs = f.modulate(t).convolve(&g.modulate(t)).unwrap();
        prop_assert!(rel(&lhs, &rhs, grid()) < TOL);
    }

    #[test]
    fn fourier_exchanges_translation_and_modulation(f in arb_fn(), w in -5.0f64..5.0, t in -5.0f64..5.0) {
        let spec = GridSpec::centered(0.0, 0.01, 4001).unwrap();
        let lhs = f.translate(w).fourier().unwrap();
        let rhs = f.fourier().unwrap().modulate(-w);
        prop_assert!(rel(&lhs, &rhs, spec) < TOL);
        let lhs = f.modulate(t).fourier().unwrap();
        let rhs = f.fourier().unwrap().translate(t);
        prop_assert!(rel(&lhs, &rhs, spec) < TOL);
    }

    #[test]
    fn translation_and_modulation_commute_up_to_phase(f in arb_fn(), w in -5.0f64..5.0, t in -5.0f64..5.0) {
        // T_w M_t f(x) = exp(-i (x + w) t) f(x + w), so the phase is exp(-i w t)
        let lhs = f.modulate(t).translate(w);
        let rhs = f.translate(w).modulate(t).scaled(Complex64::from_polar(1.0, -w * t));
        prop_assert!(rel(&lhs, &rhs, grid()) < TOL);
        let flipped = f.translate(w).modulate(t).scaled(Complex64::from_polar(1.0, w * t));
        let gap = (2.0 * (w * t).sin()).abs();
        prop_assert!((rel(&lhs, &flipped, grid()) - gap).abs() < 1e-8);
    }

    #[test]
    fn fourier_preserves_the_norm(f in arb_gauss()) {
        let g = f.sample(GridSpec::centered(0.0, 0.02, 4096).unwrap());
        let h = g.fourier();
        prop_assert!((g.norm_sqr() - h.norm_sqr()).abs() < 1e-10 * g.norm_sqr());
        let back = h.inverse_fourier();
        let e: f64 = g.samples().iter().zip(back.samples()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(e < 1e-10 * g.norm_sqr().sqrt() / g.step().sqrt());
    }

    #[test]
    fn products_and_convolutions_are_bilinear(
        f in arb_gauss(), g in arb_gauss(), h in arb_gauss(), a in -2.0f64..2.0, b in -2.0f64..2.0,
    ) {
        let spec = grid();
        let (ka, kb) = (Complex64::new(a, 0.5), Complex64::new(b, -0.3));
        let mix = f.scaled(ka).add(&g.scaled(kb)).unwrap();
        let lhs = mix.pointwise_mul(&h).unwrap();
        let rhs = f.pointwise_mul(&h).unwrap().scaled(ka).add(&g.pointwise_mul(&h).unwrap().scaled(kb)).unwrap();
        prop_assert!(lhs.l2_distance(&rhs, spec).unwrap() < 1e-10);
        prop_assert!(f.pointwise_mul(&g).unwrap().l2_distance(&g.pointwise_mul(&f).unwrap(), spec).unwrap() < 1e-12);
        prop_assert!(f.convolve(&g).unwrap().l2_distance(&g.convolve(&f).unwrap(), spec).unwrap() < 1e-10);
    }
}

#[test]
fn comb_dft_identity_holds_for_small_dimensions() {
    for d in 1..=4 {
        for j in 0..d {
            for xbar in [1.0, 2.5] {
                let r = comb_dft_identity_check(d, j, xbar, 4, DftSign::Consistent).unwrap();
                assert!(r.max_deviation < 1e-8 * r.max_value, "d={d} j={j}: {}", r.max_deviation);
                let p = comb_dft_identity_check(d, j, xbar, 4, DftSign::Printed).unwrap();
                assert_eq!(p.max_deviation < 1e-8 * p.max_value, printed_sign_holds(d, j), "d={d} j={j}");
            }
        }
    }
}

#[test]
fn fourier_of_a_dirac_comb_is_a_dirac_comb() {
    for om in [0.5, 2.0 * PI * 0.021, 3.0] {
        let c = CombFunction::dirac(om, 0.0, 200).unwrap();
        let f = c.fourier().unwrap();
        assert!((f.period - 2.0 * PI / om).abs() < 1e-12);
        assert!(f.offset.abs() < 1e-12);
        assert!(f.peak.is_dirac());
        // unitary convention: sqrt(2 pi)/om per line, i.e. (2 pi/om) / sqrt(2 pi)
        let want = (2.0 * PI).sqrt() / om;
        for n in [-3, 0, 1, 7] {
            assert!((f.center(n) - n as f64 * 2.0 * PI / om).abs() < 1e-12);
            let w = f.line_weight(n) * f.peak.scale;
            assert!((w - Complex64::new(want, 0.0)).norm() < 1e-12 * want, "{w} vs {want}");
        }
    }
}

#[test]
fn mollified_comb_fourier_matches_the_sampled_transform() {
    // Gaussian-windowed comb, transformed in closed form and on a grid
    let om = 1.0;
    let c = CombFunction {
        period: om,
        offset: 0.0,
        n_min: -60,
        n_max: 60,
        weights: AnalyticShape::flat(),
        peak: AnalyticShape::gaussian(0.05),
        envelope: AnalyticShape::gaussian(8.0),
    };
    let f = TimeFrequencyFunction::comb(AXIS, c);
    let closed = f.fourier().unwrap();
    let spec = GridSpec::centered(0.0, 0.01, 1 << 16).unwrap();
    let numeric = f.sample(spec).fourier_onto(-(spec.len as f64 / 2.0) * spec.conjugate().step);
    let tspec = numeric.spec();
    let want = closed.sample(tspec);
    let e: f64 = want.samples().iter().zip(numeric.samples()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let peak = want.samples().iter().map(|a| a.norm()).fold(0.0, f64::max);
    assert!(e < 1e-8 * peak, "{e} vs {peak}");
}
