use std::f64::consts::PI;

use mirrormodes::model::BOLTZMANN;
use mirrormodes::noise::{
    apply_rbw, displacement_psd, oscillator_psd, phase_shift, susceptibility_of, twin_mirror_psd, FrequencyGrid,
    OscillatorParams,
};
use mirrormodes::{Environment, Mode, ModeIndex, ModeShape, OpticalBeam, PolarGrid};
use proptest::prelude::*;

/// Simpson's rule in `u = atan((f - f0)/hw)`, which flattens the peak.
fn integrate_peak<F: Fn(f64) -> f64>(s: F, f0: f64, hw: f64, a: f64, b: f64) -> f64 {
    let (ua, ub) = (((a - f0) / hw).atan(), ((b - f0) / hw).atan());
    let n = 200_000;
    let h = (ub - ua) / n as f64;
    let g = |u: f64| {
        let t = u.tan();
        s(f0 + hw * t) * hw * (1.0 + t * t)
    };
    let mut sum = g(ua) + g(ub);
    for i in 1..n {
        sum += g(ua + h * i as f64) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * h / 3.0
}

fn flat_mode(f_hz: f64, q: f64, mass: f64) -> Mode {
    let shape = ModeShape::Sampled(PolarGrid::sample(5e-3, 8, 8, |_, _| 1.0));
    Mode::new(ModeIndex::parse("cyl:0,1,1").unwrap(), 2.0 * PI * f_hz, 1.0 / q, mass, shape).unwrap()
}

#[test]
fn equipartition_for_three_quality_factors() {
    for q in [1e2, 1e4, 6.5e5] {
        let f0 = 332e3;
        let p = OscillatorParams::new(2.0 * PI * f0, 2.0 * PI * f0 / q, 0.3e-3, 300.0).unwrap();
        let var = integrate_peak(|f| p.psd_hz(f), f0, f0 / (2.0 * q), f0 / 2.0, 2.0 * f0);
        assert!((var / p.variance() - 1.0).abs() < 0.01, "Q = {q}: {}", var / p.variance());
    }
}

#[test]
fn peak_value_of_a_single_mode() {
    let p = OscillatorParams::new(2.0 * PI * 143e3, 2.0 * PI * 143e3 / 6600.0, 1e-3, 300.0).unwrap();
    let expected = 2.0 * BOLTZMANN * 300.0 * 6600.0 / (1e-3 * p.omega.powi(3));
    assert!((p.psd(p.omega) / expected - 1.0).abs() < 1e-12);
}

#[test]
fn twin_mirrors_give_two_resolved_peaks() {
    let env = Environment::room_temperature();
    let beam = OpticalBeam::new(62.5e-6, 810e-9).unwrap();
    let a = [flat_mode(332e3, 6600.0, 1e-3)];
    let b = [flat_mode(332e3 * 1.005, 6600.0, 1e-3)];
    let grid = FrequencyGrid::linspace(325e3, 340e3, 15001).unwrap();
    let spec = twin_mirror_psd(&a, &b, &beam, &env, &grid).unwrap();
    let psd = spec.psd();
    let maxima = (1..psd.len() - 1)
        .filter(|&i| psd[i] > psd[i - 1] && psd[i] > psd[i + 1])
        .count();
    assert_eq!(maxima, 2);
    let single = displacement_psd(&a, &beam, &env, &grid).unwrap();
    let i0 = grid.nearest_index(332e3);
    assert!((psd[i0] / single.psd()[i0] - 1.0).abs() < 0.01);
}

#[test]
fn phase_of_a_small_displacement() {
    let psi = phase_shift(1e-17, 810e-9).unwrap();
    assert!((psi / (4.0 * PI * 1e-17 / 810e-9) - 1.0).abs() < 1e-15);
    assert!((psi / 1.55e-10 - 1.0).abs() < 0.01);
    assert!((phase_shift(810e-9 / 4.0, 810e-9).unwrap() - PI).abs() < 1e-15);
}

/// Direct convolution with the unit-area gaussian of noise bandwidth `rbw`.
fn direct_rbw(psd: &[f64], step: f64, rbw: f64, i: usize) -> f64 {
    let sigma = rbw / (2.0 * PI).sqrt();
    let norm: f64 = (-(psd.len() as isize)..=psd.len() as isize)
        .map(|k| (-0.5 * (k as f64 * step / sigma).powi(2)).exp())
        .sum();
    psd.iter()
        .enumerate()
        .map(|(j, &s)| s * (-0.5 * ((i as f64 - j as f64) * step / sigma).powi(2)).exp())
        .sum::<f64>()
        / norm
}

#[test]
fn wide_rbw_lowers_a_narrow_peak_and_keeps_its_area() {
    // 5 Hz wide resonance seen through a 300 Hz bandwidth
    let f0 = 1116e3;
    let p = OscillatorParams::new(2.0 * PI * f0, 2.0 * PI * 5.0, 1e-4, 300.0).unwrap();
    let grid = FrequencyGrid::linspace(f0 - 5e3, f0 + 5e3, 20001).unwrap();
    let raw = oscillator_psd(&[p], &grid).unwrap();
    let wide = apply_rbw(&raw, 300.0).unwrap();
    let i0 = grid.nearest_index(f0);
    let oracle = direct_rbw(raw.psd(), grid.step_hz(), 300.0, i0);
    assert!((wide.psd()[i0] / oracle - 1.0).abs() < 1e-3);
    let ratio = wide.psd()[i0] / raw.psd()[i0];
    // a lorentzian of half width γ under a gaussian of noise bandwidth B
    // peaks near πγ/B when γ ≪ B
    assert!((ratio / (PI * 2.5 / 300.0) - 1.0).abs() < 0.05, "{ratio}");
    assert!((wide.total_power() / raw.total_power() - 1.0).abs() < 1e-3);
}

#[test]
fn very_narrow_rbw_leaves_the_peak_alone() {
    let f0 = 1116e3;
    let p = OscillatorParams::new(2.0 * PI * f0, 2.0 * PI * 5.0, 1e-4, 300.0).unwrap();
    let grid = FrequencyGrid::linspace(f0 - 50.0, f0 + 50.0, 10001).unwrap();
    let raw = oscillator_psd(&[p], &grid).unwrap();
    let narrow = apply_rbw(&raw, 0.05).unwrap();
    let i0 = grid.nearest_index(f0);
    assert!((narrow.psd()[i0] / raw.psd()[i0] - 1.0).abs() < 0.01);
}

#[test]
fn rbw_below_grid_step_is_rejected() {
    let p = OscillatorParams::new(2.0 * PI * 1e5, 2.0 * PI, 1e-4, 300.0).unwrap();
    let raw = oscillator_psd(&[p], &FrequencyGrid::linspace(9e4, 1.1e5, 101).unwrap()).unwrap();
    assert!(apply_rbw(&raw, 100.0).is_err());
    assert!(apply_rbw(&raw, 200.0).is_ok());
}

proptest! {
    #[test]
    fn passive_susceptibility(omega_n in 1e3f64..1e7, q in 10f64..1e7, x in 1e-3f64..1e3, mass in 1e-6f64..1.0) {
        let chi = susceptibility_of(omega_n, 1.0 / q, mass, omega_n * x).unwrap();
        prop_assert!(chi.im > 0.0);
    }

    #[test]
    fn peak_width_equals_damping_rate(f0 in 1e4f64..1e7, q in 100f64..1e6) {
        let p = OscillatorParams::new(2.0 * PI * f0, 2.0 * PI * f0 / q, 1e-3, 300.0).unwrap();
        let peak = p.psd_hz(f0);
        let width = f0 / q;
        // bisect the half-power crossings on both sides
        let cross = |mut inside: f64, mut outside: f64| {
            for _ in 0..200 {
                let mid = 0.5 * (inside + outside);
                if p.psd_hz(mid) > peak / 2.0 { inside = mid } else { outside = mid }
            }
            0.5 * (inside + outside)
        };
        let fwhm = cross(f0, f0 + 10.0 * width) - cross(f0, f0 - 10.0 * width);
        prop_assert!((fwhm / width - 1.0).abs() < 0.02, "{}", fwhm / width);
    }

    #[test]
    fn two_mode_spectrum_is_the_sum(f1 in 1e5f64..2e5, f2 in 1e5f64..2e5, q in 1e2f64..1e5) {
        let grid = FrequencyGrid::linspace(5e4, 2.5e5, 4001).unwrap();
        let a = OscillatorParams::new(2.0 * PI * f1, 2.0 * PI * f1 / q, 1e-3, 300.0).unwrap();
        let b = OscillatorParams::new(2.0 * PI * f2, 2.0 * PI * f2 / q, 2e-3, 300.0).unwrap();
        let both = oscillator_psd(&[a, b], &grid).unwrap();
        let sa = oscillator_psd(&[a], &grid).unwrap();
        let sb = oscillator_psd(&[b], &grid).unwrap();
        let sum = sa.add(&sb).unwrap();
        for (x, y) in both.psd().iter().zip(sum.psd()) {
            prop_assert_eq!(x, y);
        }
    }
}
