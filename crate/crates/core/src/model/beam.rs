use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::quadrature::gauss_legendre_on;
use crate::error::{ensure_positive, Error, Result};

/// Gaussian probe (or pump) beam impinging on the coated face.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalBeam {
    waist: f64,
    wavelength: f64,
    offset: (f64, f64),
}

impl OpticalBeam {
    pub fn new(waist: f64, wavelength: f64) -> Result<Self> {
        if !(waist > 0.0 && waist.is_finite()) {
            return Err(Error::InvalidBeam(format!("waist must be positive, got {waist}")));
        }
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(Error::InvalidBeam(format!(
                "wavelength must be positive, got {wavelength}"
            )));
        }
        Ok(Self {
            waist,
            wavelength,
            offset: (0.0, 0.0),
        })
    }

    /// Same beam with its centre moved to `(x, y)` on the face.
    pub fn with_offset(mut self, x: f64, y: f64) -> Self {
        self.offset = (x, y);
        self
    }

    pub fn waist(&self) -> f64 {
        self.waist
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn offset(&self) -> (f64, f64) {
        self.offset
    }

    /// Normalized intensity `v0²(r) = 2/(π w0²) exp(-2|r - c|²/w0²)` (1/m²).
    pub fn intensity(&self, x: f64, y: f64) -> f64 {
        let dx = x - self.offset.0;
        let dy = y - self.offset.1;
        let w2 = self.waist * self.waist;
        2.0 / (PI * w2) * (-2.0 * (dx * dx + dy * dy) / w2).exp()
    }

    /// Overlap `∫ f(x, y) v0²(x, y) dA` of a face field with the intensity
    /// profile.
    ///
    /// The rule is polar about the beam centre and truncated at six waists,
    /// where the neglected weight is `exp(-72)`. The field is expected to
    /// return zero off the face.
    pub fn overlap<F>(&self, field: F) -> f64
    where
        F: Fn(f64, f64) -> f64,
    {
        const RADIAL_NODES: usize = 48;
        const ANGULAR_NODES: usize = 96;
        let (s_nodes, s_weights) = gauss_legendre_on(RADIAL_NODES, 0.0, 6.0 * self.waist);
        let dtheta = 2.0 * PI / ANGULAR_NODES as f64;
        let (cx, cy) = self.offset;
        let mut total = 0.0;
        for (&s, &ws) in s_nodes.iter().zip(&s_weights) {
            let radial_weight = ws * s * self.intensity(cx + s, cy);
            let mut ring = 0.0;
            for k in 0..ANGULAR_NODES {
                let theta = k as f64 * dtheta;
                ring += field(cx + s * theta.cos(), cy + s * theta.sin());
            }
            total += radial_weight * ring * dtheta;
        }
        total
    }
}

/// Waist of the fundamental mode of a plano-concave cavity of length
/// `length` closed by a coupler of curvature radius `coupler_radius`:
/// `w0² = (λ/π) sqrt(L (R_c - L))`.
pub fn cavity_waist(length: f64, coupler_radius: f64, wavelength: f64) -> Result<f64> {
    ensure_positive("cavity length", length)?;
    ensure_positive("coupler curvature radius", coupler_radius)?;
    ensure_positive("optical wavelength", wavelength)?;
    if length >= coupler_radius {
        return Err(Error::UnstableCavity {
            length,
            curvature: coupler_radius,
        });
    }
    Ok((wavelength / PI * (length * (coupler_radius - length)).sqrt()).sqrt())
}
