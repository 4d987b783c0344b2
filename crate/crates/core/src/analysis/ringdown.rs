//! Quality factors from free decays.
//!
//! Convention: Γ is the energy damping rate, so the demodulated amplitude
//! decays as `exp(-Γ t / 2)` and `Q = Ω_n / Γ`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ringdown {
    /// Energy damping rate Γ (rad/s).
    pub gamma: f64,
    pub q: f64,
    /// RMS residual of the log-amplitude fit.
    pub log_residual: f64,
}

/// Fits `ln A(t) = c - Γ t / 2` to a decaying amplitude record.
pub fn ringdown_q(times: &[f64], amplitudes: &[f64], f_hz: f64) -> Result<Ringdown> {
    if times.len() != amplitudes.len() {
        return Err(Error::InvalidConfig(format!(
            "{} times for {} amplitudes",
            times.len(),
            amplitudes.len()
        )));
    }
    if times.len() < 8 {
        return Err(Error::FitFailure("a ringdown fit needs at least 8 samples".into()));
    }
    if !(f_hz > 0.0) {
        return Err(Error::InvalidConfig(format!("resonance {f_hz} Hz must be positive")));
    }
    if let Some(a) = amplitudes.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
        return Err(Error::FitFailure(format!("amplitude {a} cannot be log-fitted")));
    }
    let logs: Vec<f64> = amplitudes.iter().map(|a| a.ln()).collect();
    let n = times.len() as f64;
    let t_mean = times.iter().sum::<f64>() / n;
    let y_mean = logs.iter().sum::<f64>() / n;
    let (mut stt, mut sty) = (0.0, 0.0);
    for (&t, &y) in times.iter().zip(&logs) {
        stt += (t - t_mean) * (t - t_mean);
        sty += (t - t_mean) * (y - y_mean);
    }
    if !(stt > 0.0) {
        return Err(Error::FitFailure("all samples share one time stamp".into()));
    }
    let slope = sty / stt;
    let residual = (times
        .iter()
        .zip(&logs)
        .map(|(&t, &y)| (y - y_mean - slope * (t - t_mean)).powi(2))
        .sum::<f64>()
        / (n - 2.0))
        .sqrt();
    let span = times.iter().copied().fold(f64::NEG_INFINITY, f64::max) - times.iter().copied().fold(f64::INFINITY, f64::min);
    let decay = -slope * span;
    if !(decay > 0.0 && decay > 3.0 * residual) {
        return Err(Error::FitFailure(format!(
            "envelope does not decay above the noise (log decay {decay:.3e}, residual {residual:.3e})"
        )));
    }
    // the mean log amplitude must fall from quarter to quarter
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
    let quarter = order.len() / 4;
    let means: Vec<f64> = (0..4)
        .map(|k| {
            let chunk = &order[k * quarter..if k == 3 { order.len() } else { (k + 1) * quarter }];
            chunk.iter().map(|&i| logs[i]).sum::<f64>() / chunk.len() as f64
        })
        .collect();
    if means.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::FitFailure("envelope is not monotonically decaying".into()));
    }
    let gamma = -2.0 * slope;
    Ok(Ringdown {
        gamma,
        q: 2.0 * PI * f_hz / gamma,
        log_residual: residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay(gamma: f64, a0: f64, n: usize, dt: f64) -> (Vec<f64>, Vec<f64>) {
        let t: Vec<f64> = (0..n).map(|i| i as f64 * dt).collect();
        let a = t.iter().map(|t| a0 * (-gamma * t / 2.0).exp()).collect();
        (t, a)
    }

    #[test]
    fn constant_record_is_rejected() {
        let t: Vec<f64> = (0..20).map(|i| i as f64).collect();
        assert!(ringdown_q(&t, &[1.0; 20], 1e6).is_err());
    }

    #[test]
    fn growing_record_is_rejected() {
        let (t, mut a) = decay(1.0, 1.0, 40, 0.1);
        a.reverse();
        assert!(ringdown_q(&t, &a, 1e6).is_err());
    }

    #[test]
    fn amplitude_scale_does_not_matter() {
        let (t, a) = decay(2.0 * PI * 1.72, 1.0, 200, 0.005);
        let scaled: Vec<f64> = a.iter().map(|v| v * 3.7e-12).collect();
        let q1 = ringdown_q(&t, &a, 1116e3).unwrap().q;
        let q2 = ringdown_q(&t, &scaled, 1116e3).unwrap().q;
        assert!((q1 / q2 - 1.0).abs() < 1e-10);
    }
}
