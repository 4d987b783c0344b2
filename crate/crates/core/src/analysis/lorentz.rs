//! Single-resonance fits of thermal peaks.

use std::f64::consts::PI;

use levenberg_marquardt::{LeastSquaresProblem, LevenbergMarquardt};
use nalgebra::storage::Owned;
use nalgebra::{DVector, Dyn, Matrix4, OMatrix, Vector4, U4};
use serde::{Deserialize, Serialize};

use super::peaks::PeakWindow;
use crate::error::{Error, Result};
use crate::model::Environment;
use crate::noise::{OscillatorParams, Spectrum};

/// Accepted range of fitted quality factors.
pub const Q_RANGE: (f64, f64) = (10.0, 1e8);

/// Half-width of the area integration, in linewidths.
pub const AREA_HALF_WIDTH: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitUncertainty {
    pub f_hz: f64,
    pub linewidth_hz: f64,
    pub m_eff: f64,
}

/// Parameters of one fitted thermal peak.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakFit {
    /// Resonance frequency (Hz).
    pub f_hz: f64,
    /// Energy damping rate Γ/2π (Hz), equal to the full width at half
    /// maximum.
    pub linewidth_hz: f64,
    pub q: f64,
    /// Variance carried by the peak, floor excluded (m²).
    pub area: f64,
    /// Effective mass `k_B T / (area Ω²)` (kg).
    pub m_eff: f64,
    /// Constant background under the peak (m²/Hz).
    pub floor: f64,
    /// Euclidean norm of the fit residuals (m²/Hz).
    pub residual_norm: f64,
    /// One-sigma uncertainties from the residual covariance.
    pub uncertainty: FitUncertainty,
    /// Circumferential order read from a scan of the mode, if known.
    pub circumferential_order: Option<u32>,
}

/// Scaled parameters: `[ (f0 - f_g)/w_g, ln(Γ/Γ_g), ln(M/M_g), floor/S_ref ]`.
struct PeakProblem {
    freqs: Vec<f64>,
    data: Vec<f64>,
    s_ref: f64,
    f_guess: f64,
    w_guess: f64,
    m_guess: f64,
    temperature: f64,
    p: Vector4<f64>,
}

impl PeakProblem {
    fn unpack(&self, p: &Vector4<f64>) -> (f64, f64, f64, f64) {
        let f0 = self.f_guess + p[0] * self.w_guess;
        let gamma = 2.0 * PI * self.w_guess * p[1].exp();
        let mass = self.m_guess * p[2].exp();
        (f0, gamma, mass, p[3] * self.s_ref)
    }

    fn oscillator(&self, p: &Vector4<f64>) -> Option<(OscillatorParams, f64)> {
        let (f0, gamma, mass, floor) = self.unpack(p);
        let osc = OscillatorParams::new(2.0 * PI * f0, gamma, mass, self.temperature).ok()?;
        Some((osc, floor))
    }

    fn residuals_at(&self, p: &Vector4<f64>) -> Option<DVector<f64>> {
        let (osc, floor) = self.oscillator(p)?;
        Some(DVector::from_iterator(
            self.freqs.len(),
            self.freqs
                .iter()
                .zip(&self.data)
                .map(|(&f, &s)| (osc.psd_hz(f) + floor - s) / self.s_ref),
        ))
    }
}

impl LeastSquaresProblem<f64, Dyn, U4> for PeakProblem {
    type ResidualStorage = Owned<f64, Dyn>;
    type JacobianStorage = Owned<f64, Dyn, U4>;
    type ParameterStorage = Owned<f64, U4>;

    fn set_params(&mut self, x: &Vector4<f64>) {
        self.p = *x;
    }

    fn params(&self) -> Vector4<f64> {
        self.p
    }

    fn residuals(&self) -> Option<DVector<f64>> {
        self.residuals_at(&self.p)
    }

    fn jacobian(&self) -> Option<OMatrix<f64, Dyn, U4>> {
        let mut jac = OMatrix::<f64, Dyn, U4>::zeros(self.freqs.len());
        for k in 0..4 {
            let h = 1e-6 * self.p[k].abs().max(1.0);
            let mut up = self.p;
            up[k] += h;
            let mut down = self.p;
            down[k] -= h;
            let col = (self.residuals_at(&up)? - self.residuals_at(&down)?) / (2.0 * h);
            jac.set_column(k, &col);
        }
        Some(jac)
    }
}

/// Fits the single-oscillator thermal spectrum plus a constant floor to the
/// samples of `window`.
pub fn fit_lorentzian(spec: &Spectrum, window: &PeakWindow, env: &Environment) -> Result<PeakFit> {
    let grid = spec.grid();
    let step = grid.step_hz();
    if window.hi >= spec.psd().len() || window.lo > window.peak || window.peak > window.hi {
        return Err(Error::FitFailure(format!("window {window:?} does not fit the spectrum")));
    }
    if window.hi - window.lo + 1 < 8 {
        return Err(Error::FitFailure("window holds fewer than 8 bins".into()));
    }
    let data: Vec<f64> = spec.psd()[window.lo..=window.hi].to_vec();
    let freqs: Vec<f64> = (window.lo..=window.hi).map(|i| grid.frequency(i)).collect();
    let ip = window.peak - window.lo;
    let s_ref = data[ip];
    if !(s_ref > 0.0) {
        return Err(Error::FitFailure("window peak is not positive".into()));
    }
    let floor_guess = data.iter().copied().fold(f64::INFINITY, f64::min);

    // parabolic refinement of the maximum
    let mut f_guess = freqs[ip];
    if ip > 0 && ip + 1 < data.len() {
        let (a, b, c) = (data[ip - 1], data[ip], data[ip + 1]);
        let denom = a - 2.0 * b + c;
        if denom < 0.0 {
            f_guess += 0.5 * (a - c) / denom * step;
        }
    }
    let w_guess = half_max_width(&data, ip, floor_guess) * step;
    let kt = env.thermal_energy();
    let omega = 2.0 * PI * f_guess;
    let q_guess = f_guess / w_guess;
    let m_guess = 4.0 * kt * q_guess / (omega.powi(3) * (s_ref - floor_guess).max(1e-300));
    let problem = PeakProblem {
        freqs,
        data,
        s_ref,
        f_guess,
        w_guess,
        m_guess,
        temperature: env.temperature(),
        p: Vector4::new(0.0, 0.0, 0.0, floor_guess / s_ref),
    };
    let (problem, report) = LevenbergMarquardt::new()
        .with_ftol(1e-14)
        .with_xtol(1e-14)
        .with_patience(200)
        .minimize(problem);
    if !report.termination.was_successful() {
        return Err(Error::FitFailure(format!("minimizer stopped: {:?}", report.termination)));
    }
    let (f0, gamma, _, floor) = problem.unpack(&problem.p);
    let linewidth_hz = gamma / (2.0 * PI);
    let q = f0 / linewidth_hz;
    if !(q >= Q_RANGE.0 && q <= Q_RANGE.1) {
        return Err(Error::FitFailure(format!(
            "fitted Q = {q:.3e} outside [{:e}, {:e}]",
            Q_RANGE.0, Q_RANGE.1
        )));
    }
    if linewidth_hz < step {
        return Err(Error::FitFailure(format!(
            "linewidth {linewidth_hz:.3e} Hz is narrower than one bin ({step:.3e} Hz); use a ringdown"
        )));
    }
    let (osc, _) = problem
        .oscillator(&problem.p)
        .ok_or_else(|| Error::FitFailure("fitted parameters are not physical".into()))?;
    let residuals = problem
        .residuals()
        .ok_or_else(|| Error::FitFailure("residuals undefined at the solution".into()))?;
    let dof = (residuals.len() as f64 - 4.0).max(1.0);
    let rms = residuals.norm() / dof.sqrt();
    let height = osc.psd_hz(f0) / s_ref;
    if height < 5.0 * rms {
        return Err(Error::FitFailure(format!(
            "peak height {height:.3e} is within five residual RMS ({rms:.3e}) of the floor"
        )));
    }

    let area = peak_area(&osc, f0, linewidth_hz);
    let m_eff = kt / (area * osc.omega * osc.omega);

    let jac = problem
        .jacobian()
        .ok_or_else(|| Error::FitFailure("Jacobian undefined at the solution".into()))?;
    let jtj: Matrix4<f64> = jac.transpose() * &jac;
    let cov = jtj
        .try_inverse()
        .map(|c| c * rms * rms)
        .unwrap_or_else(|| Matrix4::from_element(f64::NAN));
    let uncertainty = FitUncertainty {
        f_hz: cov[(0, 0)].sqrt() * w_guess,
        linewidth_hz: cov[(1, 1)].sqrt() * linewidth_hz,
        m_eff: cov[(2, 2)].sqrt() * m_eff,
    };
    Ok(PeakFit {
        f_hz: f0,
        linewidth_hz,
        q,
        area,
        m_eff,
        floor,
        residual_norm: residuals.norm() * s_ref,
        uncertainty,
        circumferential_order: None,
    })
}

/// Width at half height above `floor`, in bins, never below one bin.
fn half_max_width(data: &[f64], ip: usize, floor: f64) -> f64 {
    let half = floor + 0.5 * (data[ip] - floor);
    let side = |dir: isize| -> Option<f64> {
        let mut j = ip as isize;
        loop {
            let next = j + dir;
            if next < 0 || next as usize >= data.len() {
                return None;
            }
            let (a, b) = (data[j as usize], data[next as usize]);
            if b <= half {
                return Some((j - ip as isize).unsigned_abs() as f64 + (a - half) / (a - b));
            }
            j = next;
        }
    };
    let width = match (side(-1), side(1)) {
        (Some(l), Some(r)) => l + r,
        (Some(x), None) | (None, Some(x)) => 2.0 * x,
        (None, None) => data.len() as f64 / 4.0,
    };
    width.max(1.0)
}

/// Peak variance: the fitted shape integrated over ±10 linewidths with
/// Simpson's rule, plus the Lorentzian tails beyond.
fn peak_area(osc: &OscillatorParams, f0: f64, linewidth_hz: f64) -> f64 {
    const INTERVALS: usize = 8000;
    let half = AREA_HALF_WIDTH * linewidth_hz;
    let a = (f0 - half).max(0.0);
    let b = f0 + half;
    let h = (b - a) / INTERVALS as f64;
    let mut sum = osc.psd_hz(a) + osc.psd_hz(b);
    for i in 1..INTERVALS {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * osc.psd_hz(a + h * i as f64);
    }
    let core = sum * h / 3.0;
    // fraction of a Lorentzian of FWHM Γ lying within ±x: (2/π) atan(2x/Γ)
    let inside = 2.0 / PI * (2.0 * AREA_HALF_WIDTH).atan();
    core / inside
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{oscillator_psd, FrequencyGrid};

    fn synth(f: f64, q: f64, m: f64, bins_per_fwhm: f64, floor: f64) -> (Spectrum, PeakWindow) {
        let fwhm = f / q;
        let step = fwhm / bins_per_fwhm;
        let half = (40.0 * bins_per_fwhm) as usize;
        let grid = FrequencyGrid::with_step(f - half as f64 * step, step, 2 * half + 1).unwrap();
        let osc = OscillatorParams::new(2.0 * PI * f, 2.0 * PI * fwhm, m, 300.0).unwrap();
        let mut spec = oscillator_psd(&[osc], &grid).unwrap();
        let psd: Vec<f64> = spec.psd().iter().map(|s| s + floor).collect();
        spec = Spectrum::new(grid, psd, spec.meta.clone()).unwrap();
        let w = PeakWindow {
            peak: half,
            lo: half - (10.0 * bins_per_fwhm) as usize,
            hi: half + (10.0 * bins_per_fwhm) as usize,
        };
        (spec, w)
    }

    #[test]
    fn recovers_the_reference_peak() {
        let (spec, w) = synth(332e3, 6600.0, 0.3e-3, 12.0, 0.0);
        let fit = fit_lorentzian(&spec, &w, &Environment::room_temperature()).unwrap();
        assert!((fit.f_hz / 332e3 - 1.0).abs() < 1e-6);
        assert!((fit.q / 6600.0 - 1.0).abs() < 0.01);
        assert!((fit.m_eff / 0.3e-3 - 1.0).abs() < 0.01, "{}", fit.m_eff);
        assert!((spec.grid().frequency(w.peak) - fit.f_hz).abs() <= spec.grid().step_hz());
    }

    #[test]
    fn floor_is_separated_from_the_peak() {
        let (spec, w) = synth(1.0e6, 1e4, 1e-3, 10.0, 1e-32);
        let fit = fit_lorentzian(&spec, &w, &Environment::room_temperature()).unwrap();
        assert!((fit.floor / 1e-32 - 1.0).abs() < 1e-3);
        assert!((fit.m_eff / 1e-3 - 1.0).abs() < 0.01);
    }

    #[test]
    fn flat_noise_is_rejected() {
        let grid = FrequencyGrid::linspace(1e5, 1.001e5, 101).unwrap();
        // deterministic pseudo-noise around a constant level
        let psd: Vec<f64> = (0..101).map(|i| 1e-30 * (1.0 + 0.3 * ((i * 37 % 17) as f64 / 17.0 - 0.5))).collect();
        let spec = Spectrum::new(grid, psd.clone(), Default::default()).unwrap();
        let peak = psd
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        let w = PeakWindow { peak, lo: 0, hi: 100 };
        assert!(fit_lorentzian(&spec, &w, &Environment::room_temperature()).is_err());
    }
}
