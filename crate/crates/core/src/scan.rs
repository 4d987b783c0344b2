//! Radiation-pressure raster scans of mode shapes.
//!
//! An intensity-modulated pump spot is swept over the back of the mirror
//! while the probe beam reads the front displacement. Driven at Ω_mod, the
//! demodulated response at spot position `r0` is
//! `χ_n(Ω_mod) F u_n(r0) ⟨u_n, v0²⟩`, so the map reproduces the mode
//! profile up to one global factor.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};
use crate::model::{Environment, Mode, ModeIndex, OpticalBeam};
use crate::noise::susceptibility_of;

/// Blur beyond which a map no longer resolves half a millimetre.
pub const MAX_BLUR: f64 = 0.5e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub lines: usize,
    /// Spot speed along a line (m/s).
    pub speed: f64,
    /// Drive frequency (rad/s); `None` drives at the mode resonance.
    pub omega_mod: Option<f64>,
    /// Modulated pump power (W).
    pub power: f64,
    pub spot_waist: f64,
    /// Distance between samples along a line (m).
    pub sample_spacing: f64,
    /// Apply the first-order demodulation low-pass along the scan path.
    pub low_pass: bool,
    /// Replace the point force by the gaussian pump spot.
    pub finite_spot: bool,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            lines: 50,
            speed: 5e-3,
            omega_mod: None,
            power: 0.4,
            spot_waist: 100e-6,
            sample_spacing: 0.1e-3,
            low_pass: true,
            finite_spot: false,
        }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lines < 2 {
            return Err(Error::InvalidConfig("a scan needs at least two lines".into()));
        }
        ensure_positive("spot speed (m/s)", self.speed)?;
        ensure_positive("spot waist (m)", self.spot_waist)?;
        ensure_positive("sample spacing (m)", self.sample_spacing)?;
        if self.sample_spacing > MAX_BLUR {
            return Err(Error::OutOfRange {
                quantity: "sample spacing (m)",
                value: self.sample_spacing,
                min: 0.0,
                max: MAX_BLUR,
            });
        }
        if !(self.power >= 0.0 && self.power.is_finite()) {
            return Err(Error::InvalidConfig(format!("pump power {} W must be non-negative", self.power)));
        }
        if let Some(w) = self.omega_mod {
            ensure_positive("modulation frequency (rad/s)", w)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub x: f64,
    pub y: f64,
    /// Demodulated displacement amplitude (m).
    pub amplitude: f64,
    /// Demodulated phase (rad).
    pub phase: f64,
}

impl ScanPoint {
    pub fn radius(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn angle(&self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn response(&self) -> Complex64 {
        Complex64::from_polar(self.amplitude, self.phase)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanMap {
    /// Samples in acquisition order.
    pub points: Vec<ScanPoint>,
    pub radius: f64,
    pub mode: ModeIndex,
    pub lines: usize,
    /// Alternate lines are swept in opposite directions.
    pub serpentine: bool,
    /// Spatial blur `speed/Γ` of the demodulation low-pass (m); zero when
    /// the low-pass is disabled.
    pub blur: f64,
    /// Set when the blur exceeds [`MAX_BLUR`].
    pub blur_warning: bool,
    pub warnings: Vec<String>,
}

/// Radiation-pressure force `2P/c` of a reflected beam (N).
pub fn radiation_force(power: f64, env: &Environment) -> Result<f64> {
    if !(power >= 0.0 && power.is_finite()) {
        return Err(Error::InvalidConfig(format!("beam power {power} W must be non-negative")));
    }
    Ok(2.0 * power / env.speed_of_light())
}

/// Demodulated displacement read by `beam` when a force of amplitude
/// `force` at `omega_mod` acts at `r0 = (x, y)`.
pub fn response_at(mode: &Mode, beam: &OpticalBeam, r0: (f64, f64), force: f64, omega_mod: f64) -> Result<Complex64> {
    let overlap = beam.overlap(|x, y| mode.shape.surface(x, y));
    point_response(mode, overlap, r0, force, omega_mod, None)
}

fn point_response(
    mode: &Mode,
    overlap: f64,
    r0: (f64, f64),
    force: f64,
    omega_mod: f64,
    spot: Option<&OpticalBeam>,
) -> Result<Complex64> {
    let radius = mode.shape.face_radius();
    let d = r0.0.hypot(r0.1);
    if d > radius * (1.0 + 1e-12) {
        return Err(Error::OutOfRange {
            quantity: "force position distance from the axis (m)",
            value: d,
            min: 0.0,
            max: radius,
        });
    }
    let chi = susceptibility_of(mode.omega(), mode.loss_angle(), mode.mass(), omega_mod)?;
    let u = match spot {
        Some(beam) => beam
            .with_offset(r0.0, r0.1)
            .overlap(|x, y| mode.shape.surface(x, y)),
        None => mode.shape.surface(r0.0, r0.1),
    };
    Ok(chi * force * u * overlap)
}

fn line_positions(radius: f64, lines: usize, spacing: f64) -> Vec<Vec<(f64, f64)>> {
    (0..lines)
        .map(|k| {
            let y = radius * (2.0 * k as f64 + 1.0 - lines as f64) / lines as f64;
            let half = (radius * radius - y * y).max(0.0).sqrt();
            let count = (2.0 * half / spacing).floor() as usize + 1;
            let mid = (count - 1) as f64 / 2.0;
            let xs = (0..count).map(|j| ((j as f64 - mid) * spacing, y));
            if k % 2 == 0 {
                xs.collect()
            } else {
                xs.rev().collect()
            }
        })
        .collect()
}

/// Raster scan of `mode` on uniformly spaced horizontal lines, alternate
/// lines swept in opposite directions.
pub fn raster_scan(mode: &Mode, beam: &OpticalBeam, env: &Environment, cfg: &ScanConfig) -> Result<ScanMap> {
    cfg.validate()?;
    let force = radiation_force(cfg.power, env)?;
    let omega_mod = cfg.omega_mod.unwrap_or(mode.omega());
    let overlap = beam.overlap(|x, y| mode.shape.surface(x, y));
    let spot = if cfg.finite_spot {
        Some(OpticalBeam::new(cfg.spot_waist, beam.wavelength())?)
    } else {
        None
    };
    let gamma = mode.damping_rate();
    // amplitude relaxes with time constant 1/Γ, sampled every spacing/speed
    let alpha = if cfg.low_pass {
        1.0 - (-cfg.sample_spacing / cfg.speed * gamma).exp()
    } else {
        1.0
    };
    let radius = mode.shape.face_radius();
    let lines: Vec<Result<Vec<ScanPoint>>> = line_positions(radius, cfg.lines, cfg.sample_spacing)
        .into_par_iter()
        .map(|line| {
            let mut state: Option<Complex64> = None;
            line.into_iter()
                .map(|(x, y)| {
                    let raw = point_response(mode, overlap, (x, y), force, omega_mod, spot.as_ref())?;
                    let filtered = match state {
                        None => raw,
                        Some(prev) => prev + alpha * (raw - prev),
                    };
                    state = Some(filtered);
                    Ok(ScanPoint {
                        x,
                        y,
                        amplitude: filtered.norm(),
                        phase: filtered.arg(),
                    })
                })
                .collect()
        })
        .collect();
    let mut points = Vec::new();
    for line in lines {
        points.extend(line?);
    }
    let blur = if cfg.low_pass { cfg.speed / gamma } else { 0.0 };
    Ok(ScanMap {
        points,
        radius,
        mode: mode.index,
        lines: cfg.lines,
        serpentine: true,
        blur,
        blur_warning: blur > MAX_BLUR,
        warnings: Vec::new(),
    })
}

/// Modes of `catalog` other than `mode` whose resonance lies within three
/// linewidths of the drive frequency.
pub fn contamination_warnings(mode: &Mode, catalog: &[Mode], omega_mod: Option<f64>) -> Vec<String> {
    let drive = omega_mod.unwrap_or(mode.omega());
    catalog
        .iter()
        .filter(|other| other.index != mode.index)
        .filter(|other| {
            let width = other.damping_rate().max(mode.damping_rate());
            (other.omega() - drive).abs() < 3.0 * width
        })
        .map(|other| {
            format!(
                "mode {} at {:.3} kHz lies within 3 linewidths of the drive at {:.3} kHz",
                other.index,
                other.frequency_hz() * 1e-3,
                drive / (2.0 * PI) * 1e-3
            )
        })
        .collect()
}
