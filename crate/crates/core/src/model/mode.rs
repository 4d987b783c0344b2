//! The mode record shared by both solvers and every downstream consumer.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cylinder::{CylIndex, CylinderShape};
use crate::error::{Error, Result};
use crate::gaussian::{GaussIndex, GaussianShape};

/// Largest loss angle accepted for a mode (Q = 10).
pub const MAX_LOSS_ANGLE: f64 = 0.1;

/// Size of the polar grid (radial and angular nodes) on which solvers
/// normalize face shapes to a maximum displacement of one.
pub const NORMALIZATION_SAMPLES: usize = 200;

/// Largest `|f(r)|` over the radial nodes of the normalization grid.
///
/// Every emitted shape is `f(r) cos(kθ)` and `θ = 0` is a grid node, so this
/// is also the maximum over the full `NORMALIZATION_SAMPLES²` grid.
pub fn normalization_peak<F: Fn(f64) -> f64>(radius: f64, f: F) -> f64 {
    let n = NORMALIZATION_SAMPLES;
    (0..n)
        .map(|i| f(radius * i as f64 / (n - 1) as f64).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum ModeIndex {
    Cyl(CylIndex),
    Gauss(GaussIndex),
}

impl ModeIndex {
    /// Azimuthal order of the face displacement (`n` for cylinder modes,
    /// `l` for gaussian modes).
    pub fn azimuthal_order(&self) -> u32 {
        match self {
            ModeIndex::Cyl(c) => c.n,
            ModeIndex::Gauss(g) => g.l,
        }
    }

    /// Parses `cyl:n,xi,m` or `gauss:n,p,l`.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("cannot parse mode index `{text}`; expected cyl:n,xi,m or gauss:n,p,l"));
        let (family, rest) = text.split_once(':').ok_or_else(bad)?;
        let nums: Vec<u32> = rest
            .split(',')
            .map(|s| s.trim().parse::<u32>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?;
        if nums.len() != 3 {
            return Err(bad());
        }
        match family.trim() {
            "cyl" => Ok(ModeIndex::Cyl(CylIndex::new(nums[0], nums[1] as u8, nums[2])?)),
            "gauss" => Ok(ModeIndex::Gauss(GaussIndex::new(nums[0], nums[1], nums[2])?)),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModeIndex::Cyl(c) => write!(f, "cyl:{},{},{}", c.n, c.xi, c.m),
            ModeIndex::Gauss(g) => write!(f, "gauss:{},{},{}", g.n, g.p, g.l),
        }
    }
}

/// Face displacement sampled on a regular polar grid.
///
/// Node `(i, j)` sits at `r_i = radius * i / (n_r - 1)` and
/// `θ_j = 2π j / n_theta`; `values` is row-major in `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarGrid {
    pub radius: f64,
    pub n_r: usize,
    pub n_theta: usize,
    pub values: Vec<f64>,
}

impl PolarGrid {
    pub fn new(radius: f64, n_r: usize, n_theta: usize, values: Vec<f64>) -> Result<Self> {
        if !(radius > 0.0) || n_r < 2 || n_theta < 1 || values.len() != n_r * n_theta {
            return Err(Error::InvalidConfig(format!(
                "polar grid needs radius > 0, n_r >= 2, n_theta >= 1 and n_r*n_theta values (got {} for {n_r}x{n_theta})",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("polar grid holds non-finite values".into()));
        }
        Ok(Self {
            radius,
            n_r,
            n_theta,
            values,
        })
    }

    pub fn sample<F: Fn(f64, f64) -> f64>(radius: f64, n_r: usize, n_theta: usize, f: F) -> Self {
        let mut values = Vec::with_capacity(n_r * n_theta);
        for i in 0..n_r {
            let r = radius * i as f64 / (n_r - 1) as f64;
            for j in 0..n_theta {
                let theta = 2.0 * PI * j as f64 / n_theta as f64;
                values.push(f(r, theta));
            }
        }
        Self {
            radius,
            n_r,
            n_theta,
            values,
        }
    }

    pub fn node(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_theta + j]
    }

    /// Bilinear interpolation in `(r, θ)`, periodic in `θ`, zero off the face.
    pub fn interpolate(&self, r: f64, theta: f64) -> f64 {
        if r > self.radius * (1.0 + 1e-12) || r < 0.0 {
            return 0.0;
        }
        let fr = (r / self.radius * (self.n_r - 1) as f64).min((self.n_r - 1) as f64);
        let i0 = (fr.floor() as usize).min(self.n_r - 2);
        let tr = fr - i0 as f64;
        let ft = theta.rem_euclid(2.0 * PI) / (2.0 * PI) * self.n_theta as f64;
        let j0 = (ft.floor() as usize) % self.n_theta;
        let j1 = (j0 + 1) % self.n_theta;
        let tt = ft - ft.floor();
        let lerp = |i: usize| self.node(i, j0) * (1.0 - tt) + self.node(i, j1) * tt;
        lerp(i0) * (1.0 - tr) + lerp(i0 + 1) * tr
    }
}

/// Normalized longitudinal displacement of the coated face.
#[derive(Debug, Clone, PartialEq)]
pub enum ModeShape {
    Cylinder(CylinderShape),
    Gaussian(GaussianShape),
    Sampled(PolarGrid),
}

impl ModeShape {
    /// Face displacement at polar position `(r, θ)`; zero off the face.
    pub fn surface_polar(&self, r: f64, theta: f64) -> f64 {
        match self {
            ModeShape::Cylinder(s) => s.surface(r, theta),
            ModeShape::Gaussian(s) => s.surface(r, theta),
            ModeShape::Sampled(g) => g.interpolate(r, theta),
        }
    }

    pub fn surface(&self, x: f64, y: f64) -> f64 {
        self.surface_polar(x.hypot(y), y.atan2(x))
    }

    pub fn face_radius(&self) -> f64 {
        match self {
            ModeShape::Cylinder(s) => s.radius(),
            ModeShape::Gaussian(s) => s.face_radius(),
            ModeShape::Sampled(g) => g.radius,
        }
    }

    pub fn to_grid(&self, n_r: usize, n_theta: usize) -> PolarGrid {
        PolarGrid::sample(self.face_radius(), n_r, n_theta, |r, t| self.surface_polar(r, t))
    }

    /// Largest `|u|` over an `n × n` polar sampling of the face.
    pub fn sampled_max(&self, n: usize) -> f64 {
        self.to_grid(n, n)
            .values
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()))
    }
}

/// One acoustic mode: index, resonance, damping, modal mass and face shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    pub index: ModeIndex,
    omega: f64,
    loss_angle: f64,
    mass: f64,
    pub shape: ModeShape,
}

impl Mode {
    pub fn new(index: ModeIndex, omega: f64, loss_angle: f64, mass: f64, shape: ModeShape) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::Domain(format!("mode {index}: resonance {omega} rad/s must be positive")));
        }
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::Domain(format!("mode {index}: modal mass {mass} kg must be positive")));
        }
        if !(loss_angle > 0.0 && loss_angle <= MAX_LOSS_ANGLE) {
            return Err(Error::Domain(format!(
                "mode {index}: loss angle {loss_angle} must lie in (0, {MAX_LOSS_ANGLE}]"
            )));
        }
        Ok(Self {
            index,
            omega,
            loss_angle,
            mass,
            shape,
        })
    }

    /// Resonance angular frequency Ω (rad/s).
    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn frequency_hz(&self) -> f64 {
        self.omega / (2.0 * PI)
    }

    pub fn loss_angle(&self) -> f64 {
        self.loss_angle
    }

    /// Energy damping rate Γ = Φ Ω (rad/s).
    pub fn damping_rate(&self) -> f64 {
        self.loss_angle * self.omega
    }

    pub fn quality_factor(&self) -> f64 {
        1.0 / self.loss_angle
    }

    /// Modal mass (kg) under the max-face-displacement-one normalization.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn with_loss_angle(mut self, loss_angle: f64) -> Result<Self> {
        let index = self.index;
        if !(loss_angle > 0.0 && loss_angle <= MAX_LOSS_ANGLE) {
            return Err(Error::Domain(format!(
                "mode {index}: loss angle {loss_angle} must lie in (0, {MAX_LOSS_ANGLE}]"
            )));
        }
        self.loss_angle = loss_angle;
        Ok(self)
    }

    /// Same mode with a different resonance, keeping shape and mass.
    pub fn with_omega(mut self, omega: f64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::Domain(format!("resonance {omega} rad/s must be positive")));
        }
        self.omega = omega;
        Ok(self)
    }

    /// Same mode with its shape replaced by a polar sampling of itself.
    pub fn sampled(&self, n_r: usize, n_theta: usize) -> Self {
        Self {
            shape: ModeShape::Sampled(self.shape.to_grid(n_r, n_theta)),
            ..self.clone()
        }
    }
}
