//! Free vibrations of a traction-free isotropic cylinder.
//!
//! The displacement field is expanded block by block: circumferential order
//! `n` decouples exactly, and so does the parity of the field under the
//! mirror symmetry `z → -z`. Each block becomes a symmetric generalized
//! eigenproblem `K q = ω² M q` over the polynomial trial space of
//! [`basis`](self::basis), solved by Rayleigh–Ritz. Frequencies are upper
//! bounds that decrease monotonically as the basis order grows.
//!
//! For `n ≥ 1` only the `cos nθ` branch is emitted; the `sin nθ` branch is
//! the same mode rotated by `π/2n` and has the same frequency. The `n = 0`
//! torsional family (pure `u_θ`) is solved for completeness but never
//! emitted, since it leaves both faces flat and cannot be seen by a beam.

mod basis;
mod block;

use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use self::basis::{evaluate, BlockBasis, FieldSample, Kind};
pub use self::block::{generalized_symmetric_eigen, BlockSolution};
use crate::error::{Error, Result};
use crate::model::quadrature::gauss_legendre_on;
use crate::model::{normalization_peak, CylinderGeometry, Material, Mode, ModeIndex, ModeShape};

/// Frequencies below this magnitude (Hz) are treated as rigid-body motion.
pub const RIGID_BODY_THRESHOLD_HZ: f64 = 1.0;

/// Behaviour of the field under `z → -z` (the mid-plane reflection).
///
/// `Extensional` (ξ = 0): in-plane displacement even, `u_z` odd, so both
/// faces move outward together. `Flexural` (ξ = 1): `u_z` even, the faces
/// move in opposite outward directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Parity {
    Extensional,
    Flexural,
}

impl Parity {
    pub fn xi(self) -> u8 {
        match self {
            Parity::Extensional => 0,
            Parity::Flexural => 1,
        }
    }

    pub fn from_xi(xi: u8) -> Result<Self> {
        match xi {
            0 => Ok(Parity::Extensional),
            1 => Ok(Parity::Flexural),
            _ => Err(Error::InvalidConfig(format!("parity must be 0 or 1, got {xi}"))),
        }
    }
}

/// `(n, ξ, m)` label of a cylinder mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CylIndex {
    pub n: u32,
    pub xi: u8,
    pub m: u32,
}

impl CylIndex {
    pub fn new(n: u32, xi: u8, m: u32) -> Result<Self> {
        Parity::from_xi(xi)?;
        if m == 0 {
            return Err(Error::InvalidConfig("order number m starts at 1".into()));
        }
        Ok(Self { n, xi, m })
    }

    pub fn parity(&self) -> Parity {
        if self.xi == 0 {
            Parity::Extensional
        } else {
            Parity::Flexural
        }
    }
}

impl fmt::Display for CylIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {} {})", self.n, self.xi, self.m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RitzConfig {
    /// Number of radial trial functions `N_b`; axial degrees run
    /// `0..=N_b`. Modes are reported from order `N_b + 2` and checked
    /// against order `N_b`.
    pub basis_order: usize,
    /// Largest circumferential order solved.
    pub n_max: u32,
    pub f_min_hz: f64,
    pub f_max_hz: f64,
    /// Minimum Gauss–Legendre order per coordinate. The solver raises it
    /// when needed to integrate the energies exactly.
    pub quadrature_order: Option<usize>,
    /// Largest relative frequency shift accepted between basis orders
    /// `N_b` and `N_b + 2`.
    pub convergence_tol: f64,
    /// Loss angle attached to every emitted mode.
    pub loss_angle: f64,
}

impl Default for RitzConfig {
    fn default() -> Self {
        Self {
            basis_order: 10,
            n_max: 12,
            f_min_hz: 1.0,
            f_max_hz: 500e3,
            quadrature_order: None,
            convergence_tol: 2e-3,
            loss_angle: 1.0 / 6600.0,
        }
    }
}

impl RitzConfig {
    pub fn validate(&self) -> Result<()> {
        if self.basis_order < 4 {
            return Err(Error::InvalidConfig(format!(
                "basis order must be at least 4, got {}",
                self.basis_order
            )));
        }
        if !(self.f_min_hz >= 0.0 && self.f_max_hz > self.f_min_hz && self.f_max_hz.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "frequency window [{}, {}] Hz is empty",
                self.f_min_hz, self.f_max_hz
            )));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(Error::InvalidConfig("convergence tolerance must be positive".into()));
        }
        if !(self.loss_angle > 0.0 && self.loss_angle <= crate::model::MAX_LOSS_ANGLE) {
            return Err(Error::InvalidConfig(format!(
                "loss angle {} outside (0, {}]",
                self.loss_angle,
                crate::model::MAX_LOSS_ANGLE
            )));
        }
        Ok(())
    }
}

/// Normalized displacement field of one Ritz eigenvector.
///
/// Coordinates are cylindrical with `z` measured from the mid-plane; the
/// coated face is `z = +h/2` and the back face `z = -h/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderShape {
    basis: BlockBasis,
    coeffs: Vec<f64>,
    radius: f64,
    thickness: f64,
}

impl CylinderShape {
    /// Builds the shape of coefficient vector `coeffs` scaled so that the
    /// coated-face displacement peaks at one. Returns the shape and the
    /// scale factor applied.
    fn normalized(basis: BlockBasis, coeffs: &[f64], geom: &CylinderGeometry) -> Result<(Self, f64)> {
        let raw = Self {
            basis,
            coeffs: coeffs.to_vec(),
            radius: geom.radius(),
            thickness: geom.thickness(),
        };
        let peak = normalization_peak(raw.radius, |r| raw.face_profile(r / raw.radius, 1.0));
        if !(peak > 0.0 && peak.is_finite()) {
            return Err(Error::Classification(format!(
                "block n = {} leaves the coated face at rest",
                raw.basis.n
            )));
        }
        let scale = 1.0 / peak;
        let coeffs = raw.coeffs.iter().map(|c| c * scale).collect();
        Ok((Self { coeffs, ..raw }, scale))
    }

    fn face_profile(&self, rho: f64, zeta: f64) -> f64 {
        self.basis
            .funcs
            .iter()
            .zip(&self.coeffs)
            .filter(|(f, _)| f.kind == Kind::Axial)
            .map(|(f, c)| c * evaluate(f, rho, zeta, self.radius, self.thickness).w)
            .sum()
    }

    fn field(&self, rho: f64, zeta: f64) -> FieldSample {
        let mut total = FieldSample::default();
        for (f, &c) in self.basis.funcs.iter().zip(&self.coeffs) {
            total.add_scaled(&evaluate(f, rho, zeta, self.radius, self.thickness), c);
        }
        total
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn thickness(&self) -> f64 {
        self.thickness
    }

    pub fn circumferential_order(&self) -> u32 {
        self.basis.n
    }

    pub fn parity(&self) -> Parity {
        self.basis.parity
    }

    /// Longitudinal displacement of the coated face; zero off the face.
    pub fn surface(&self, r: f64, theta: f64) -> f64 {
        if !(0.0..=self.radius * (1.0 + 1e-12)).contains(&r) {
            return 0.0;
        }
        self.face_profile((r / self.radius).min(1.0), 1.0) * (self.basis.n as f64 * theta).cos()
    }

    /// Outward normal displacement of the back face (`-u_z` at `z = -h/2`).
    pub fn back_surface(&self, r: f64, theta: f64) -> f64 {
        if !(0.0..=self.radius * (1.0 + 1e-12)).contains(&r) {
            return 0.0;
        }
        -self.face_profile((r / self.radius).min(1.0), -1.0) * (self.basis.n as f64 * theta).cos()
    }

    /// Displacement `(u_r, u_θ, u_z)` at a point of the body.
    pub fn displacement(&self, r: f64, theta: f64, z: f64) -> Result<[f64; 3]> {
        let half = 0.5 * self.thickness;
        if !(0.0..=self.radius * (1.0 + 1e-12)).contains(&r) || z.abs() > half * (1.0 + 1e-12) {
            return Err(Error::OutOfRange {
                quantity: "point outside the cylinder (r or |z|)",
                value: if r > self.radius { r } else { z },
                min: 0.0,
                max: if r > self.radius { self.radius } else { half },
            });
        }
        let s = self.field((r / self.radius).min(1.0), (z / half).clamp(-1.0, 1.0));
        let nt = self.basis.n as f64 * theta;
        Ok([s.u * nt.cos(), s.v * nt.sin(), s.w * nt.cos()])
    }
}

/// Solves one block at the given basis order.
pub fn solve_block(
    geom: &CylinderGeometry,
    mat: &Material,
    n: u32,
    parity: Parity,
    torsional: bool,
    basis_order: usize,
) -> Result<BlockSolution> {
    if torsional && n != 0 {
        return Err(Error::InvalidConfig("the torsional family exists only for n = 0".into()));
    }
    block::solve_block(geom, mat, BlockBasis::new(n, parity, torsional, basis_order), None)
}

#[derive(Debug, Clone, Copy)]
struct BlockKey {
    n: u32,
    parity: Parity,
    torsional: bool,
}

fn block_keys(n_max: u32, with_torsion: bool) -> Vec<BlockKey> {
    let mut keys = Vec::new();
    for n in 0..=n_max {
        for parity in [Parity::Extensional, Parity::Flexural] {
            keys.push(BlockKey { n, parity, torsional: false });
            if with_torsion && n == 0 {
                keys.push(BlockKey { n, parity, torsional: true });
            }
        }
    }
    keys
}

fn is_rigid(f_hz: f64) -> bool {
    f_hz.abs() < RIGID_BODY_THRESHOLD_HZ
}

/// Free-vibration modes of the cylinder inside the configured window,
/// sorted by frequency then index.
pub fn solve_modes(geom: &CylinderGeometry, mat: &Material, cfg: &RitzConfig) -> Result<Vec<Mode>> {
    cfg.validate()?;
    let per_block: Vec<Result<Vec<Mode>>> = block_keys(cfg.n_max, false)
        .into_par_iter()
        .map(|key| block_modes(geom, mat, cfg, key))
        .collect();
    let mut modes = Vec::new();
    for block in per_block {
        modes.extend(block?);
    }
    modes.sort_by(|a, b| a.omega().total_cmp(&b.omega()).then(a.index.cmp(&b.index)));
    Ok(modes)
}

fn block_modes(geom: &CylinderGeometry, mat: &Material, cfg: &RitzConfig, key: BlockKey) -> Result<Vec<Mode>> {
    let solve = |order| {
        block::solve_block(
            geom,
            mat,
            BlockBasis::new(key.n, key.parity, key.torsional, order),
            cfg.quadrature_order,
        )
    };
    let fine = solve(cfg.basis_order + 2)?;
    let coarse = solve(cfg.basis_order)?;
    let elastic = |sol: &BlockSolution| -> Vec<(usize, f64)> {
        sol.frequencies_hz()
            .into_iter()
            .enumerate()
            .filter(|(_, f)| !is_rigid(*f))
            .collect()
    };
    let fine_f = elastic(&fine);
    let coarse_f = elastic(&coarse);
    let mut out = Vec::new();
    for (rank, &(col, f)) in fine_f.iter().enumerate() {
        if f < cfg.f_min_hz || f > cfg.f_max_hz {
            continue;
        }
        let index = CylIndex {
            n: key.n,
            xi: key.parity.xi(),
            m: rank as u32 + 1,
        };
        let shift = coarse_f
            .get(rank)
            .map(|&(_, fc)| (fc - f).abs() / f)
            .unwrap_or(f64::INFINITY);
        if shift > cfg.convergence_tol {
            return Err(Error::Convergence {
                mode: index.to_string(),
                shift,
                tolerance: cfg.convergence_tol,
            });
        }
        let q: Vec<f64> = fine.vectors.column(col).iter().copied().collect();
        let (shape, scale) = CylinderShape::normalized(fine.basis.clone(), &q, geom)?;
        let (n, parity) = classify(&shape)?;
        if n != key.n || parity != key.parity {
            return Err(Error::Classification(format!(
                "mode {index} solved in block (n = {}, ξ = {}) classifies as (n = {n}, ξ = {})",
                key.n,
                key.parity.xi(),
                parity.xi()
            )));
        }
        let mass = fine.mass_inner(col, col) * scale * scale;
        out.push(Mode::new(
            ModeIndex::Cyl(index),
            2.0 * PI * f,
            cfg.loss_angle,
            mass,
            ModeShape::Cylinder(shape),
        )?);
    }
    Ok(out)
}

/// Number of rigid-body solutions (|f| below [`RIGID_BODY_THRESHOLD_HZ`])
/// over all blocks up to `cfg.n_max`, torsion included, counting the
/// degenerate `sin nθ` branch of every `n ≥ 1` block.
pub fn rigid_body_count(geom: &CylinderGeometry, mat: &Material, cfg: &RitzConfig) -> Result<usize> {
    cfg.validate()?;
    let counts: Vec<Result<usize>> = block_keys(cfg.n_max, true)
        .into_par_iter()
        .map(|key| {
            let sol = solve_block(geom, mat, key.n, key.parity, key.torsional, cfg.basis_order)?;
            let rigid = sol.frequencies_hz().into_iter().filter(|&f| is_rigid(f)).count();
            Ok(if key.n >= 1 { 2 * rigid } else { rigid })
        })
        .collect();
    counts.into_iter().sum()
}

/// Circumferential order and parity of a solved shape, read back from its
/// face displacements.
pub fn classify(shape: &CylinderShape) -> Result<(u32, Parity)> {
    classify_surfaces(|r, t| shape.surface(r, t), |r, t| shape.back_surface(r, t), shape.radius())
}

/// Classifies a pair of outward face displacements `front(r, θ)` and
/// `back(r, θ)`: `n` is the dominant azimuthal Fourier order of the front
/// face and the parity follows from the sign of the front/back correlation.
pub fn classify_surfaces<F, G>(front: F, back: G, radius: f64) -> Result<(u32, Parity)>
where
    F: Fn(f64, f64) -> f64,
    G: Fn(f64, f64) -> f64,
{
    const RINGS: usize = 16;
    const ANGLES: usize = 128;
    const MIXED_TOLERANCE: f64 = 1e-6;
    let mut power = vec![0.0; ANGLES / 2 + 1];
    let (mut ff, mut bb, mut fb) = (0.0, 0.0, 0.0);
    for k in 0..RINGS {
        let r = radius * (k as f64 + 0.5) / RINGS as f64;
        let ring: Vec<(f64, f64)> = (0..ANGLES)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / ANGLES as f64;
                (front(r, t), back(r, t))
            })
            .collect();
        for (order, p) in power.iter_mut().enumerate() {
            let (mut c, mut s) = (0.0, 0.0);
            for (j, &(v, _)) in ring.iter().enumerate() {
                let t = 2.0 * PI * (order * j) as f64 / ANGLES as f64;
                c += v * t.cos();
                s += v * t.sin();
            }
            *p += r * (c * c + s * s);
        }
        for &(v, w) in &ring {
            ff += r * v * v;
            bb += r * w * w;
            fb += r * v * w;
        }
    }
    let total: f64 = power.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Classification("face displacement vanishes identically".into()));
    }
    let (n, dominant) = power
        .iter()
        .enumerate()
        .fold((0, 0.0), |best, (i, &p)| if p > best.1 { (i, p) } else { best });
    if 1.0 - dominant / total > MIXED_TOLERANCE {
        return Err(Error::Classification(format!(
            "azimuthal order {n} holds only {:.6} of the face power",
            dominant / total
        )));
    }
    let correlation = fb / (ff * bb).sqrt();
    let parity = if correlation > 0.5 {
        Parity::Extensional
    } else if correlation < -0.5 {
        Parity::Flexural
    } else {
        return Err(Error::Classification(format!(
            "front/back correlation {correlation:.3} gives no definite parity"
        )));
    };
    Ok((n as u32, parity))
}

/// `ρ ∫ |u|² dV` of the field `u(r, θ, z) = (u_r, u_θ, u_z)` over the
/// cylinder, `z` measured from the mid-plane.
///
/// Gauss–Legendre in `r` and `z` with `order` nodes each and a uniform
/// rule of `angular` nodes in `θ` (exact for trigonometric integrands of
/// degree below `angular`).
pub fn field_mass<F>(geom: &CylinderGeometry, mat: &Material, order: usize, angular: usize, field: F) -> f64
where
    F: Fn(f64, f64, f64) -> [f64; 3],
{
    let a = geom.radius();
    let half = 0.5 * geom.thickness();
    let (rs, wr) = gauss_legendre_on(order, 0.0, a);
    let (zs, wz) = gauss_legendre_on(order, -half, half);
    let dt = 2.0 * PI / angular as f64;
    let mut total = 0.0;
    for (&r, &w_r) in rs.iter().zip(&wr) {
        for (&z, &w_z) in zs.iter().zip(&wz) {
            let mut ring = 0.0;
            for k in 0..angular {
                let u = field(r, k as f64 * dt, z);
                ring += u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
            }
            total += w_r * w_z * r * ring * dt;
        }
    }
    mat.density() * total
}

/// Modal mass `ρ ∫ |u|² dV` of a normalized shape, integrated directly from
/// the displacement field.
pub fn modal_mass(shape: &CylinderShape, mat: &Material) -> f64 {
    let geom = CylinderGeometry::new(shape.radius, shape.thickness).expect("shape geometry is valid");
    let order = 2 * shape.basis.order + shape.basis.n as usize + 4;
    let angular = 4 * shape.basis.n as usize + 4;
    field_mass(&geom, mat, order, angular, |r, t, z| {
        shape.displacement(r, t, z).unwrap_or([0.0; 3])
    })
}

/// Modal mass of a cylinder mode from its own shape.
pub fn mode_mass(mode: &Mode, mat: &Material) -> Result<f64> {
    match &mode.shape {
        ModeShape::Cylinder(s) => Ok(modal_mass(s, mat)),
        _ => Err(Error::Domain(format!("mode {} carries no cylinder field", mode.index))),
    }
}
