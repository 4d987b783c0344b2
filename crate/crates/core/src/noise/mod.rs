//! Thermal displacement noise seen by a probe beam.
//!
//! Each mode is a damped oscillator with structural damping (constant loss
//! angle Φ) driven by an independent Langevin force. The readout sees mode
//! `n` with the effective mass `M_n / ⟨u_n, v0²⟩²`, and the spectrum is the
//! incoherent sum of the single-mode contributions.
//!
//! Spectra are stored one-sided in hertz: `S(f) = 2 S_û(2πf)` where `S_û(Ω)`
//! is the two-sided density in Ω returned by
//! [`OscillatorParams::psd`], so that `∫ S df` over positive frequencies is
//! the displacement variance `k_B T / (M_eff Ω_n²)`.

mod rbw;

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use self::rbw::apply_rbw;
use crate::error::{ensure_positive, Error, Result};
use crate::model::{Environment, Mode, OpticalBeam};

/// Overlaps below this magnitude make the effective mass infinite.
pub const NULL_OVERLAP: f64 = 1e-12;

/// Uniform frequency grid (Hz).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    start_hz: f64,
    step_hz: f64,
    len: usize,
}

impl FrequencyGrid {
    pub fn with_step(start_hz: f64, step_hz: f64, len: usize) -> Result<Self> {
        if !(start_hz >= 0.0 && start_hz.is_finite()) {
            return Err(Error::InvalidConfig(format!("grid start {start_hz} Hz must be non-negative")));
        }
        ensure_positive("grid step (Hz)", step_hz)?;
        if len < 2 {
            return Err(Error::InvalidConfig("a frequency grid needs at least two points".into()));
        }
        Ok(Self {
            start_hz,
            step_hz,
            len,
        })
    }

    /// `len` points from `start_hz` to `stop_hz` inclusive.
    pub fn linspace(start_hz: f64, stop_hz: f64, len: usize) -> Result<Self> {
        if !(stop_hz > start_hz) {
            return Err(Error::InvalidConfig(format!(
                "grid stop {stop_hz} Hz must exceed start {start_hz} Hz"
            )));
        }
        if len < 2 {
            return Err(Error::InvalidConfig("a frequency grid needs at least two points".into()));
        }
        Self::with_step(start_hz, (stop_hz - start_hz) / (len - 1) as f64, len)
    }

    pub fn start_hz(&self) -> f64 {
        self.start_hz
    }

    pub fn step_hz(&self) -> f64 {
        self.step_hz
    }

    pub fn stop_hz(&self) -> f64 {
        self.frequency(self.len - 1)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn frequency(&self, i: usize) -> f64 {
        self.start_hz + self.step_hz * i as f64
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.frequency(i)).collect()
    }

    /// Index of the grid point nearest to `f_hz`, clamped to the grid.
    pub fn nearest_index(&self, f_hz: f64) -> usize {
        let i = ((f_hz - self.start_hz) / self.step_hz).round();
        i.clamp(0.0, (self.len - 1) as f64) as usize
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SpectrumMeta {
    /// Resolution bandwidth applied (Hz), if any.
    pub rbw_hz: Option<f64>,
    /// Free-form labels, e.g. the mirrors contributing.
    pub labels: Vec<String>,
}

/// One-sided displacement power spectral density (m²/Hz) on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: FrequencyGrid,
    psd: Vec<f64>,
    pub meta: SpectrumMeta,
}

impl Spectrum {
    pub fn new(grid: FrequencyGrid, psd: Vec<f64>, meta: SpectrumMeta) -> Result<Self> {
        if psd.len() != grid.len() {
            return Err(Error::InvalidConfig(format!(
                "{} PSD values for a {}-point grid",
                psd.len(),
                grid.len()
            )));
        }
        if let Some(i) = psd.iter().position(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::Domain(format!(
                "PSD must be finite and non-negative; bin {i} holds {}",
                psd[i]
            )));
        }
        Ok(Self { grid, psd, meta })
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.grid.frequencies()
    }

    pub fn psd(&self) -> &[f64] {
        &self.psd
    }

    /// Amplitude spectral density (m/√Hz).
    pub fn asd(&self) -> Vec<f64> {
        self.psd.iter().map(|s| s.sqrt()).collect()
    }

    /// `Σ S_i Δf`, the variance carried by the grid.
    pub fn total_power(&self) -> f64 {
        self.psd.iter().sum::<f64>() * self.grid.step_hz()
    }

    /// Bin-wise sum of two spectra on the same grid.
    pub fn add(&self, other: &Spectrum) -> Result<Spectrum> {
        if self.grid != other.grid {
            return Err(Error::InvalidConfig("cannot add spectra on different grids".into()));
        }
        let psd = self.psd.iter().zip(&other.psd).map(|(a, b)| a + b).collect();
        let mut labels = self.meta.labels.clone();
        labels.extend(other.meta.labels.iter().cloned());
        let rbw_hz = if self.meta.rbw_hz == other.meta.rbw_hz {
            self.meta.rbw_hz
        } else {
            None
        };
        Spectrum::new(self.grid, psd, SpectrumMeta { rbw_hz, labels })
    }
}

/// Single-oscillator parameters of one thermal peak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorParams {
    /// Resonance Ω_n (rad/s).
    pub omega: f64,
    /// Energy damping rate Γ_n (rad/s).
    pub gamma: f64,
    /// Effective mass (kg).
    pub mass: f64,
    pub temperature: f64,
}

impl OscillatorParams {
    pub fn new(omega: f64, gamma: f64, mass: f64, temperature: f64) -> Result<Self> {
        ensure_positive("resonance (rad/s)", omega)?;
        ensure_positive("damping rate (rad/s)", gamma)?;
        ensure_positive("effective mass (kg)", mass)?;
        ensure_positive("temperature (K)", temperature)?;
        if gamma >= omega {
            return Err(Error::Domain(format!(
                "damping rate {gamma:e} rad/s must stay below the resonance {omega:e} rad/s"
            )));
        }
        Ok(Self {
            omega,
            gamma,
            mass,
            temperature,
        })
    }

    /// Peak as seen by `beam`; `None` when the overlap vanishes.
    pub fn from_mode(mode: &Mode, beam: &OpticalBeam, env: &Environment) -> Result<Option<Self>> {
        let m_eff = effective_mass(mode, beam)?;
        if m_eff.is_infinite() {
            return Ok(None);
        }
        Self::new(mode.omega(), mode.damping_rate(), m_eff.mass, env.temperature()).map(Some)
    }

    pub fn loss_angle(&self) -> f64 {
        self.gamma / self.omega
    }

    pub fn quality_factor(&self) -> f64 {
        self.omega / self.gamma
    }

    /// Displacement variance `k_B T / (M Ω²)` (m²).
    pub fn variance(&self) -> f64 {
        crate::model::BOLTZMANN * self.temperature / (self.mass * self.omega * self.omega)
    }

    /// `S_û(Ω) = 2 Φ Ω_n² k_B T / (Ω M ((Ω_n² - Ω²)² + Φ² Ω_n⁴))`, the
    /// density per unit `Ω/2π` over both signs of Ω.
    pub fn psd(&self, omega: f64) -> f64 {
        let phi = self.loss_angle();
        let w2 = self.omega * self.omega;
        let kt = crate::model::BOLTZMANN * self.temperature;
        let det = w2 - omega * omega;
        2.0 * phi * w2 * kt / (omega.abs() * self.mass * (det * det + phi * phi * w2 * w2))
    }

    /// One-sided density in hertz, `2 S_û(2πf)`.
    pub fn psd_hz(&self, f_hz: f64) -> f64 {
        2.0 * self.psd(2.0 * PI * f_hz)
    }
}

/// Mechanical susceptibility `χ = 1/(M(Ω_n² - Ω² - iΦΩ_n²))` (m/N).
pub fn susceptibility(mode: &Mode, omega: f64) -> Result<Complex64> {
    susceptibility_of(mode.omega(), mode.loss_angle(), mode.mass(), omega)
}

pub fn susceptibility_of(omega_n: f64, loss_angle: f64, mass: f64, omega: f64) -> Result<Complex64> {
    if !(omega >= 0.0) {
        return Err(Error::Domain(format!("drive frequency {omega} rad/s must be non-negative")));
    }
    let w2 = omega_n * omega_n;
    Ok(1.0 / (mass * Complex64::new(w2 - omega * omega, -loss_angle * w2)))
}

/// Langevin force spectrum `S_T = -(2 k_B T/Ω) Im(1/χ) = 2 k_B T M Φ Ω_n²/Ω`
/// (N²/Hz).
pub fn langevin_psd(mode: &Mode, env: &Environment, omega: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::Domain(format!(
            "Langevin spectrum diverges at Ω = {omega}; needs Ω > 0"
        )));
    }
    Ok(2.0 * env.thermal_energy() * mode.mass() * mode.loss_angle() * mode.omega().powi(2) / omega)
}

/// Effective mass seen by a beam; `mass` is `f64::INFINITY` when the
/// overlap falls below [`NULL_OVERLAP`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveMass {
    pub mass: f64,
    /// `⟨u_n, v0²⟩`, kept as a diagnostic.
    pub overlap: f64,
}

impl EffectiveMass {
    pub fn is_infinite(&self) -> bool {
        self.mass.is_infinite()
    }
}

/// `M_eff = M_n / ⟨u_n, v0²⟩²`.
pub fn effective_mass(mode: &Mode, beam: &OpticalBeam) -> Result<EffectiveMass> {
    let (cx, cy) = beam.offset();
    let radius = mode.shape.face_radius();
    if cx.hypot(cy) > radius {
        return Err(Error::OutOfRange {
            quantity: "beam centre distance from the axis (m)",
            value: cx.hypot(cy),
            min: 0.0,
            max: radius,
        });
    }
    let overlap = beam.overlap(|x, y| mode.shape.surface(x, y));
    let mass = if overlap.abs() < NULL_OVERLAP {
        f64::INFINITY
    } else {
        mode.mass() / (overlap * overlap)
    };
    Ok(EffectiveMass { mass, overlap })
}

/// One-sided spectrum of a set of independent oscillators.
pub fn oscillator_psd(peaks: &[OscillatorParams], grid: &FrequencyGrid) -> Result<Spectrum> {
    if grid.start_hz() == 0.0 && !peaks.is_empty() {
        return Err(Error::Domain("the thermal spectrum diverges at f = 0; start the grid above zero".into()));
    }
    let psd: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let f = grid.frequency(i);
            peaks.iter().map(|p| p.psd_hz(f)).sum()
        })
        .collect();
    Spectrum::new(*grid, psd, SpectrumMeta::default())
}

/// Thermal displacement spectrum of a mode catalog read by `beam`. Modes
/// with a null overlap contribute nothing.
pub fn displacement_psd(
    modes: &[Mode],
    beam: &OpticalBeam,
    env: &Environment,
    grid: &FrequencyGrid,
) -> Result<Spectrum> {
    let mut peaks = Vec::with_capacity(modes.len());
    for mode in modes {
        if let Some(p) = OscillatorParams::from_mode(mode, beam, env)? {
            peaks.push(p);
        }
    }
    oscillator_psd(&peaks, grid)
}

/// Spectrum of a two-mirror cavity: the incoherent sum of both catalogs.
pub fn twin_mirror_psd(
    first: &[Mode],
    second: &[Mode],
    beam: &OpticalBeam,
    env: &Environment,
    grid: &FrequencyGrid,
) -> Result<Spectrum> {
    let mut a = displacement_psd(first, beam, env, grid)?;
    a.meta.labels = vec!["mirror 1".into()];
    let mut b = displacement_psd(second, beam, env, grid)?;
    b.meta.labels = vec!["mirror 2".into()];
    a.add(&b)
}

/// Phase shift `ψ = 4π û / λ` of the reflected field (rad).
pub fn phase_shift(displacement: f64, wavelength: f64) -> Result<f64> {
    ensure_positive("optical wavelength (m)", wavelength)?;
    Ok(4.0 * PI * displacement / wavelength)
}

/// Displacement equivalent to an optical frequency modulation:
/// `Δu = L Δν / ν`.
pub fn calibrate_displacement(delta_nu: f64, nu: f64, length: f64) -> Result<f64> {
    ensure_positive("optical frequency (Hz)", nu)?;
    ensure_positive("cavity length (m)", length)?;
    Ok(length * delta_nu / nu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{GaussIndex, GaussianShape};
    use crate::model::{ModeIndex, ModeShape, PlanoConvexGeometry, SPEED_OF_LIGHT};

    fn gaussian_mode(l: u32) -> Mode {
        let g = PlanoConvexGeometry::new(12e-3, 180e-3, 1.55e-3).unwrap();
        let idx = GaussIndex::new(4, 0, l).unwrap();
        Mode::new(
            ModeIndex::Gauss(idx),
            2.0 * PI * 7.8e6,
            1.0 / 650e3,
            0.05e-3,
            ModeShape::Gaussian(GaussianShape::new(&g, idx).unwrap()),
        )
        .unwrap()
    }

    #[test]
    fn susceptibility_limits() {
        let mode = gaussian_mode(0);
        let k = mode.mass() * mode.omega().powi(2);
        let dc = susceptibility(&mode, 0.0).unwrap();
        assert!((dc.norm() * k - 1.0).abs() < 1e-6);
        let res = susceptibility(&mode, mode.omega()).unwrap();
        assert!((res.norm() * k / mode.quality_factor() - 1.0).abs() < 1e-12);
        assert!((res.arg() - PI / 2.0).abs() < 1e-12);
        assert!(susceptibility(&mode, -1.0).is_err());
    }

    #[test]
    fn langevin_spectrum() {
        let mode = gaussian_mode(0);
        let env = Environment::room_temperature();
        let at = langevin_psd(&mode, &env, mode.omega()).unwrap();
        let expect = 2.0 * mode.mass() * mode.damping_rate() * env.thermal_energy();
        assert!((at - expect).abs() < 1e-12 * expect);
        let half = langevin_psd(&mode, &env, mode.omega() / 2.0).unwrap();
        assert!((half / at - 2.0).abs() < 1e-12);
        // -(2kT/Ω) Im(1/χ)
        let w = 0.9 * mode.omega();
        let inv = 1.0 / susceptibility(&mode, w).unwrap();
        let fdt = -2.0 * env.thermal_energy() / w * inv.im;
        assert!((langevin_psd(&mode, &env, w).unwrap() - fdt).abs() < 1e-10 * fdt);
        assert!(langevin_psd(&mode, &env, 0.0).is_err());
    }

    #[test]
    fn centred_beam_cannot_see_azimuthal_modes() {
        let beam = OpticalBeam::new(62.5e-6, 810e-9).unwrap();
        let m = effective_mass(&gaussian_mode(1), &beam).unwrap();
        assert!(m.is_infinite());
        let off = beam.with_offset(0.5e-3, 0.0);
        let m = effective_mass(&gaussian_mode(1), &off).unwrap();
        assert!(m.mass.is_finite() && m.mass > 0.0);
        let m0 = effective_mass(&gaussian_mode(0), &beam).unwrap();
        assert!((m0.mass / gaussian_mode(0).mass() - 1.0).abs() < 0.01);
        assert!(effective_mass(&gaussian_mode(0), &beam.with_offset(7e-3, 0.0)).is_err());
    }

    #[test]
    fn peak_value_and_conversions() {
        let p = OscillatorParams::new(2.0 * PI * 332e3, 2.0 * PI * 332e3 / 6600.0, 0.3e-3, 300.0).unwrap();
        let kt = crate::model::BOLTZMANN * 300.0;
        let peak = 2.0 * kt * 6600.0 / (p.mass * p.omega.powi(3));
        assert!((p.psd(p.omega) - peak).abs() < 1e-12 * peak);
        assert!((p.psd_hz(332e3) - 2.0 * peak).abs() < 1e-12 * peak);
        assert!(OscillatorParams::new(1.0, 2.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn phase_and_calibration() {
        assert!((phase_shift(810e-9 / 4.0, 810e-9).unwrap() - PI).abs() < 1e-15);
        assert_eq!(phase_shift(0.0, 810e-9).unwrap(), 0.0);
        assert!((phase_shift(1e-17, 810e-9).unwrap() - 1.5514e-10).abs() < 1e-13);
        let nu = SPEED_OF_LIGHT / 810e-9;
        let du = calibrate_displacement(7e3, nu, 0.23e-3).unwrap();
        assert!((du - 4.35e-15).abs() < 1e-18, "{du}");
        assert_eq!(calibrate_displacement(0.0, nu, 0.23e-3).unwrap(), 0.0);
        assert!(calibrate_displacement(7e3, 0.0, 0.23e-3).is_err());
    }

    #[test]
    fn spectrum_validation() {
        let g = FrequencyGrid::linspace(1.0, 2.0, 3).unwrap();
        assert!(Spectrum::new(g, vec![0.0, -1.0, 0.0], SpectrumMeta::default()).is_err());
        assert!(Spectrum::new(g, vec![0.0; 2], SpectrumMeta::default()).is_err());
        assert!(FrequencyGrid::linspace(2.0, 1.0, 3).is_err());
    }
}
