// Copyright 2026 TFGKP Contributors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use tfgkp::func::{AnalyticShape, GridFunction, GridSpec};
use tfgkp::states::*;

const OMEGA_0: f64 = 1200.0;

fn omega_r() -> f64 {
    2.0 * PI * 0.021
}

fn l2(a: &GridFunction, b: &GridFunction) -> f64 {
    let s: f64 = a.samples().iter().zip(b.samples()).map(|(x, y)| (x - y).norm_sqr()).sum();
    (s * a.step()).sqrt()
}

fn lorentz_time(j: usize, d: usize, c: TimeConstruction) -> TfgkpState {
    TfgkpState::time_basis(
        j,
        d,
        omega_r(),
        OMEGA_0,
        lorentzian_peak(0.01 * omega_r()),
        temporal_gaussian_envelope(4.0),
        c,
    )
    .unwrap()
}

fn gauss_state(basis: BasisLabel, d: usize) -> TfgkpState {
    TfgkpState::from_descriptor(StateDescriptor {
        d,
        omega_r: omega_r(),
        omega_0: OMEGA_0,
        tau_0: 0.0,
        basis,
        peak: AnalyticShape::gaussian_amplitude(0.002),
        envelope: temporal_gaussian_envelope(4.0),
        dispersion: None,
        construction: TimeConstruction::Dft,
    })
    .unwrap()
}

#[test]
fn dft_and_direct_time_basis_agree() {
    for d in [2, 3] {
        for j in 0..d {
            let a = lorentz_time(j, d, TimeConstruction::Dft);
            let b = lorentz_time(j, d, TimeConstruction::Direct);
            let g = a.temporal_grid();
            let e = l2(&a.temporal_amplitude_grid(g).unwrap(), &b.temporal_amplitude_grid(g).unwrap());
            assert!(e < 1e-8, "d={d} j={j}: {e}");
        }
    }
}

#[test]
fn frequency_basis_overlap_matches_line_series() {
    // Temporal lines of |0_f> and |1_f> (d = 2) sit at m T, T = 2 pi / omega_r,
    // with weights |w_m|^2 = 2 gamma exp(-2 gamma m T) (m > 0) and a quarter of
    // 2 gamma at the jump m = 0; |1_f> alternates their sign.
    let d = 2;
    let gamma = 0.01 * omega_r();
    let s0 =
        TfgkpState::frequency_basis(0, d, omega_r(), OMEGA_0, lorentzian_peak(gamma), temporal_gaussian_envelope(4.0))
            .unwrap();
    let s1 =
        TfgkpState::frequency_basis(1, d, omega_r(), OMEGA_0, lorentzian_peak(gamma), temporal_gaussian_envelope(4.0))
            .unwrap();
    let r = (-2.0 * gamma * 2.0 * PI / omega_r()).exp();
    let alt = 0.25 - r / (1.0 + r);
    let all = 0.25 + r / (1.0 - r);
    let want = (alt / all).abs();
    let got = s0.inner_product(&s1).unwrap().norm();
    assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    // leading order pi gamma / omega_r
    assert!((got - PI * 0.01).abs() < 0.1 * PI * 0.01);
}

#[test]
fn narrow_peak_limit_approaches_identity() {
    let d = 2;
    let mut prev = f64::INFINITY;
    for (gamma_rel, sigma_t) in [(0.02, 2.0), (0.005, 4.0), (0.001, 8.0)] {
        let mk = |j| {
            TfgkpState::frequency_basis(
                j,
                d,
                omega_r(),
                OMEGA_0,
                lorentzian_peak(gamma_rel * omega_r()),
                temporal_gaussian_envelope(sigma_t),
            )
            .unwrap()
        };
        let g = gram_matrix(&[mk(0), mk(1)]).unwrap();
        let off = g[0][1].norm();
        assert!((g[0][0].re - 1.0).abs() < 1e-8);
        assert!(off < prev, "{off} !< {prev}");
        prev = off;
    }
}

#[test]
fn time_basis_states_are_orthonormal_at_default_widths() {
    for d in [2, 3] {
        let states: Vec<_> = (0..d).map(|j| gauss_state(BasisLabel::Time(j), d)).collect();
        let g = gram_matrix(&states).unwrap();
        for a in 0..d {
            for b in 0..d {
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((g[a][b].norm() - want).abs() < 1e-3, "d={d} ({a},{b}) {}", g[a][b]);
            }
        }
    }
}

#[test]
fn time_basis_inverse_dft_recovers_frequency_basis() {
    let d = 3;
    let times: Vec<_> = (0..d).map(|j| gauss_state(BasisLabel::Time(j), d)).collect();
    let spec = times[0].spectral_grid();
    let amps: Vec<_> = times.iter().map(|s| s.spectral_amplitude_grid(spec).unwrap()).collect();
    for k in 0..d {
        let mut acc = vec![Complex64::new(0.0, 0.0); spec.len];
        for (j, a) in amps.iter().enumerate() {
            let c = Complex64::from_polar(1.0 / (d as f64).sqrt(), -2.0 * PI * (j * k) as f64 / d as f64);
            for (x, y) in acc.iter_mut().zip(a.samples()) {
                *x += c * y;
            }
        }
        let rebuilt = GridFunction::new(spec, a_axis(&amps[0]), acc).unwrap();
        let direct = gauss_state(BasisLabel::Frequency(k), d).spectral_amplitude_grid(spec).unwrap();
        let e = l2(&rebuilt, &direct);
        assert!(e < 1e-6, "k={k}: {e}");
    }
}

fn a_axis(g: &GridFunction) -> tfgkp::func::AxisKind {
    g.axis()
}

#[test]
fn fourier_of_spectral_amplitude_is_temporal_amplitude() {
    let s = gauss_state(BasisLabel::Time(1), 2).propagate(25.0, None);
    let fspec = s.spectral_grid();
    let spectral = s.spectral_amplitude_grid(fspec).unwrap();
    let conj = fspec.conjugate();
    let origin = 25.0 - (conj.len / 2) as f64 * conj.step;
    let via_fft = spectral.fourier_onto(origin);
    let closed = s.temporal_amplitude().unwrap().sample(via_fft.spec());
    let rel = l2(&via_fft, &closed) / closed.norm_sqr().sqrt();
    assert!(rel < 1e-10, "{rel}");
}

#[test]
fn propagation_translates_the_temporal_density() {
    let s = gauss_state(BasisLabel::Time(0), 2);
    let p = s.propagate(13.7, None);
    let spec = p.temporal_grid();
    let moved = p.temporal_density(Some(spec)).unwrap();
    let back = GridSpec { origin: spec.origin - 13.7, ..spec };
    let orig = s.temporal_density(Some(back)).unwrap();
    assert!(l2(&moved, &orig) < 1e-10);
    assert!((p.carrier_phase() - Complex64::from_polar(1.0, OMEGA_0 * 13.7)).norm() < 1e-12);
}

#[test]
fn propagations_compose() {
    let s = gauss_state(BasisLabel::Time(1), 2);
    let a = s.propagate(3.0, Some(DispersionRecord::new(20.0))).propagate(4.0, Some(DispersionRecord::new(30.0)));
    let b = s.propagate(7.0, Some(DispersionRecord::new(50.0)));
    assert_eq!(a.descriptor(), b.descriptor());
    let spec = b.spectral_grid();
    assert!(l2(&a.spectral_amplitude_grid(spec).unwrap(), &b.spectral_amplitude_grid(spec).unwrap()) < 1e-10);
}

#[test]
fn dispersion_matches_chirped_gaussian_oracle() {
    let fwhm = 10.0;
    let k2l = 50.0;
    let om = 2.0 * PI / 400.0;
    let sigma_t = fwhm / (8.0 * LN_2).sqrt();
    let s = TfgkpState::frequency_basis(
        0,
        1,
        om,
        OMEGA_0,
        AnalyticShape::gaussian_amplitude(om / 400.0),
        temporal_gaussian_envelope(sigma_t),
    )
    .unwrap();
    let p = s.propagate(0.0, Some(DispersionRecord::new(k2l)));
    let w = fwhm_near(&p.temporal_density(None).unwrap(), 0.0).unwrap();
    // independent oracle: Gaussian pulse exp(-t^2/2s^2) acquires
    // s'^2 = s^2 + (k2l/s)^2 in the intensity width parameter
    let s0 = fwhm / (4.0 * LN_2).sqrt();
    let s1 = (s0 * s0 + (k2l / s0).powi(2)).sqrt();
    let want = s1 * (4.0 * LN_2).sqrt();
    assert!((w - want).abs() / want < 0.01, "{w} vs {want}");
    assert!((chirped_gaussian_fwhm(fwhm, k2l) - want).abs() < 1e-9);
    // the minimum over input widths is the sqrt(8 ln2 k''L) scale
    let best = (1..4000).map(|i| chirped_gaussian_fwhm(i as f64 * 0.01, k2l)).fold(f64::INFINITY, f64::min);
    assert!((best - DispersionRecord::new(k2l).broadening_scale()).abs() < 1e-3);
}

#[test]
fn dirac_peaks_land_exactly_on_the_lines() {
    let d = 2;
    let s =
        TfgkpState::frequency_basis(0, d, omega_r(), OMEGA_0, AnalyticShape::dirac(), temporal_gaussian_envelope(4.0))
            .unwrap();
    let f = s.spectral_amplitude().unwrap();
    if let tfgkp::func::Repr::Comb(c) = &f.repr {
        for n in c.n_min..=c.n_max {
            let x = c.center(n);
            assert!((x / omega_r() - (x / omega_r()).round()).abs() < 1e-12);
        }
    } else {
        panic!("expected comb form");
    }
}

#[test]
fn csv_export_has_header_and_rows() {
    let s = gauss_state(BasisLabel::Frequency(0), 2);
    let mut buf = Vec::new();
    let spec = GridSpec::covering(-0.5, 0.5, 11).unwrap();
    s.write_csv(&mut buf, tfgkp::func::AxisKind::AngularFrequency, Some(spec)).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "x,re,im,density");
    assert_eq!(lines.len(), 12);
}
