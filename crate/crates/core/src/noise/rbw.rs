//! Spectrum-analyzer resolution bandwidth.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::Spectrum;
use crate::error::{Error, Result};

/// Smooths `spec` with a gaussian window of equivalent noise bandwidth
/// `rbw_hz`.
///
/// Each input bin spreads its power over its neighbours with the window
/// weights renormalized to the part of the window inside the grid, so the
/// total power `Σ S Δf` is conserved exactly, edges included.
pub fn apply_rbw(spec: &Spectrum, rbw_hz: f64) -> Result<Spectrum> {
    let step = spec.grid().step_hz();
    if !(rbw_hz >= step) {
        return Err(Error::OutOfRange {
            quantity: "resolution bandwidth (Hz)",
            value: rbw_hz,
            min: step,
            max: f64::INFINITY,
        });
    }
    let n = spec.psd().len();
    let sigma = rbw_hz / (2.0 * PI).sqrt() / step;
    let half = ((6.0 * sigma).ceil() as usize).min(n - 1);
    let kernel: Vec<f64> = (0..=2 * half)
        .map(|k| {
            let d = k as f64 - half as f64;
            (-0.5 * d * d / (sigma * sigma)).exp()
        })
        .collect();
    let mut prefix = vec![0.0; kernel.len() + 1];
    for (k, w) in kernel.iter().enumerate() {
        prefix[k + 1] = prefix[k] + w;
    }
    // input bin i reaches outputs i + k - half for k with 0 <= i + k - half < n
    let weighted: Vec<f64> = spec
        .psd()
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let lo = half.saturating_sub(i);
            let hi = (n - 1 + half - i).min(2 * half);
            s / (prefix[hi + 1] - prefix[lo])
        })
        .collect();
    let out = convolve(&weighted, &kernel, half);
    let peak = spec.psd().iter().fold(0.0f64, |a, &b| a.max(b));
    // FFT round-off can leave tiny negative values far below the data
    let psd = out
        .into_iter()
        .map(|v| if v.abs() < 1e-13 * peak { v.max(0.0) } else { v })
        .collect();
    let mut meta = spec.meta.clone();
    meta.rbw_hz = Some(rbw_hz);
    Spectrum::new(*spec.grid(), psd, meta)
}

/// `out[j] = Σ_i x[i] k[j - i + half]` for `j` in `0..x.len()`.
fn convolve(x: &[f64], kernel: &[f64], half: usize) -> Vec<f64> {
    let len = (x.len() + kernel.len()).next_power_of_two();
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(len);
    let inverse = planner.plan_fft_inverse(len);
    let mut a: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    a.resize(len, Complex64::default());
    let mut b: Vec<Complex64> = kernel.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    b.resize(len, Complex64::default());
    forward.process(&mut a);
    forward.process(&mut b);
    for (u, v) in a.iter_mut().zip(&b) {
        *u *= v;
    }
    inverse.process(&mut a);
    let scale = 1.0 / len as f64;
    a[half..half + x.len()].iter().map(|c| c.re * scale).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{FrequencyGrid, SpectrumMeta};

    fn direct(x: &[f64], kernel: &[f64], half: usize) -> Vec<f64> {
        (0..x.len())
            .map(|j| {
                (0..x.len())
                    .filter_map(|i| kernel.get((j + half).checked_sub(i)?).map(|k| x[i] * k))
                    .sum()
            })
            .collect()
    }

    #[test]
    fn fft_convolution_matches_direct_sum() {
        let x: Vec<f64> = (0..37).map(|i| ((i * 7 % 11) as f64).sin().abs()).collect();
        let k = [0.1, 0.5, 1.0, 0.5, 0.1];
        let a = convolve(&x, &k, 2);
        let b = direct(&x, &k, 2);
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn power_is_conserved_at_the_edges() {
        let grid = FrequencyGrid::linspace(0.0, 100.0, 101).unwrap();
        let mut psd = vec![0.0; 101];
        psd[0] = 3.0;
        psd[50] = 1.0;
        psd[100] = 2.0;
        let spec = Spectrum::new(grid, psd, SpectrumMeta::default()).unwrap();
        let out = apply_rbw(&spec, 10.0).unwrap();
        assert!((out.total_power() - spec.total_power()).abs() < 1e-12);
        assert_eq!(out.meta.rbw_hz, Some(10.0));
        assert!(apply_rbw(&spec, 0.5).is_err());
    }

    #[test]
    fn window_has_requested_noise_bandwidth() {
        let grid = FrequencyGrid::linspace(0.0, 2000.0, 2001).unwrap();
        let mut psd = vec![0.0; 2001];
        psd[1000] = 1.0;
        let spec = Spectrum::new(grid, psd, SpectrumMeta::default()).unwrap();
        let out = apply_rbw(&spec, 100.0).unwrap();
        let peak = out.psd()[1000];
        let enbw = out.total_power() / peak;
        assert!((enbw - 100.0).abs() < 1e-6 * 100.0, "{enbw}");
    }
}
