//! Confined compression modes of plano-convex substrates.
//!
//! In the paraxial regime (curvature radius much larger than the thickness)
//! the longitudinal displacement of mode `(n, p, l)` is
//!
//! ```text
//! u(r, θ, z) = exp(-r²/w_n²) (r/w_n)^l L_p^l(2r²/w_n²) cos(lθ) cos(nπ z / h(r))
//! ```
//!
//! with `z` measured from the flat coated face, acoustic waist
//! `w_n² = (2 h0 / nπ) sqrt(R h0)` and resonance
//! `Ω² = (π c_l / h0)² [n² + (2/π) sqrt(h0/R) n (2p + l + 1)]`.
//! Modes with equal `2p + l` at fixed `n` are exactly degenerate. Only the
//! `cos lθ` branch is emitted; the `sin lθ` partner is a rotated copy.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::quadrature::gauss_legendre_on;
use crate::model::{normalization_peak, Material, Mode, ModeIndex, ModeShape, PlanoConvexGeometry};

/// Quality factor assumed for odd overtones when none is supplied.
pub const DEFAULT_Q_ODD: f64 = 350_000.0;
/// Quality factor assumed for even overtones when none is supplied.
pub const DEFAULT_Q_EVEN: f64 = 650_000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GaussIndex {
    pub n: u32,
    pub p: u32,
    pub l: u32,
}

impl GaussIndex {
    pub fn new(n: u32, p: u32, l: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("longitudinal overtone n starts at 1".into()));
        }
        Ok(Self { n, p, l })
    }

    /// Transverse family `2p + l`.
    pub fn family(&self) -> u32 {
        2 * self.p + self.l
    }
}

impl fmt::Display for GaussIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {} {})", self.n, self.p, self.l)
    }
}

/// Generalized Laguerre polynomial `L_p^l(x)` by forward recurrence.
pub fn laguerre(p: u32, l: u32, x: f64) -> f64 {
    let alpha = l as f64;
    let mut prev = 1.0;
    if p == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for k in 1..p {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 + alpha - x) * cur - (k + alpha) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

fn require_paraxial(geom: &PlanoConvexGeometry) -> Result<()> {
    if geom.is_paraxial() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "gaussian modes need R/h0 >= {}; got R = {:e} m, h0 = {:e} m",
            crate::model::PARAXIAL_MIN_RATIO,
            geom.curvature_radius(),
            geom.center_thickness()
        )))
    }
}

/// Acoustic waist `w_n` (m).
pub fn acoustic_waist(geom: &PlanoConvexGeometry, n: u32) -> Result<f64> {
    require_paraxial(geom)?;
    if n == 0 {
        return Err(Error::InvalidConfig("longitudinal overtone n starts at 1".into()));
    }
    let h0 = geom.center_thickness();
    let r = geom.curvature_radius();
    Ok((2.0 * h0 / (n as f64 * PI) * (r * h0).sqrt()).sqrt())
}

/// Resonance angular frequency `Ω_npl` (rad/s). Depends on `p` and `l`
/// only through `2p + l`.
pub fn resonance_frequency(geom: &PlanoConvexGeometry, mat: &Material, idx: GaussIndex) -> Result<f64> {
    require_paraxial(geom)?;
    Ok(family_frequency(geom, mat, idx.n, idx.family()))
}

fn family_frequency(geom: &PlanoConvexGeometry, mat: &Material, n: u32, family: u32) -> f64 {
    let h0 = geom.center_thickness();
    let n = n as f64;
    let transverse = 2.0 / PI * (h0 / geom.curvature_radius()).sqrt() * n * (family as f64 + 1.0);
    PI * mat.longitudinal_velocity() / h0 * (n * n + transverse).sqrt()
}

fn radial_profile(idx: GaussIndex, waist: f64, r: f64) -> f64 {
    let s = r / waist;
    (-s * s).exp() * s.powi(idx.l as i32) * laguerre(idx.p, idx.l, 2.0 * s * s)
}

/// Un-normalized longitudinal displacement at `(r, θ, z)`, `z` measured
/// from the flat face into the substrate.
pub fn displacement(geom: &PlanoConvexGeometry, idx: GaussIndex, r: f64, theta: f64, z: f64) -> Result<f64> {
    let waist = acoustic_waist(geom, idx.n)?;
    let h = geom.thickness_at(r)?;
    if !(0.0..=h).contains(&z) {
        return Err(Error::OutOfRange {
            quantity: "depth below the flat face",
            value: z,
            min: 0.0,
            max: h,
        });
    }
    Ok(radial_profile(idx, waist, r) * (idx.l as f64 * theta).cos() * (idx.n as f64 * PI * z / h).cos())
}

/// Normalized face displacement of a gaussian mode.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianShape {
    index: GaussIndex,
    waist: f64,
    face_radius: f64,
    scale: f64,
}

impl GaussianShape {
    pub fn new(geom: &PlanoConvexGeometry, idx: GaussIndex) -> Result<Self> {
        let waist = acoustic_waist(geom, idx.n)?;
        let face_radius = geom.radius();
        let peak = normalization_peak(face_radius, |r| radial_profile(idx, waist, r));
        if !(peak > 0.0) {
            return Err(Error::Domain(format!("mode {idx} vanishes on the face")));
        }
        Ok(Self {
            index: idx,
            waist,
            face_radius,
            scale: 1.0 / peak,
        })
    }

    pub fn index(&self) -> GaussIndex {
        self.index
    }

    pub fn waist(&self) -> f64 {
        self.waist
    }

    pub fn face_radius(&self) -> f64 {
        self.face_radius
    }

    /// Normalized radial factor (the face displacement along `θ = 0`).
    pub fn radial(&self, r: f64) -> f64 {
        self.scale * radial_profile(self.index, self.waist, r)
    }

    pub fn surface(&self, r: f64, theta: f64) -> f64 {
        if !(0.0..=self.face_radius * (1.0 + 1e-12)).contains(&r) {
            return 0.0;
        }
        self.radial(r) * (self.index.l as f64 * theta).cos()
    }
}

/// `ρ ∫ |u|² dV` over the cap volume with the face-normalized shape.
pub fn modal_mass(geom: &PlanoConvexGeometry, mat: &Material, idx: GaussIndex) -> Result<f64> {
    let shape = GaussianShape::new(geom, idx)?;
    let (rs, wr) = gauss_legendre_on(RADIAL_NODES, 0.0, geom.radius());
    let axial_nodes = 4 * idx.n as usize + 16;
    let angular_nodes = 4 * idx.l as usize + 4;
    let dt = 2.0 * PI / angular_nodes as f64;
    let angular: f64 = (0..angular_nodes)
        .map(|k| (idx.l as f64 * k as f64 * dt).cos().powi(2) * dt)
        .sum();
    let mut total = 0.0;
    for (&r, &w) in rs.iter().zip(&wr) {
        let h = geom.thickness_at(r)?;
        let (zs, wz) = gauss_legendre_on(axial_nodes, 0.0, h);
        let depth: f64 = zs
            .iter()
            .zip(&wz)
            .map(|(&z, &wzz)| wzz * (idx.n as f64 * PI * z / h).cos().powi(2))
            .sum();
        total += w * r * shape.radial(r).powi(2) * depth;
    }
    Ok(mat.density() * total * angular)
}

const RADIAL_NODES: usize = 256;

/// Uniform-thickness approximation `ρ (h0/2)(π w_n²/2)` of the `(n, 0, 0)`
/// mass.
pub fn fundamental_mass_estimate(geom: &PlanoConvexGeometry, mat: &Material, n: u32) -> Result<f64> {
    let w = acoustic_waist(geom, n)?;
    Ok(mat.density() * 0.5 * geom.center_thickness() * PI * w * w / 2.0)
}

/// Default loss angle of overtone `n`.
pub fn default_loss_angle(n: u32) -> f64 {
    if n % 2 == 1 {
        1.0 / DEFAULT_Q_ODD
    } else {
        1.0 / DEFAULT_Q_EVEN
    }
}

/// Largest transverse family `2p + l` of overtone `n` whose turning radius
/// `w_n sqrt(2p + l + 1)` stays on the face.
pub fn max_confined_family(geom: &PlanoConvexGeometry, n: u32) -> Result<u32> {
    let w = acoustic_waist(geom, n)?;
    let ratio = geom.radius() / w;
    Ok((ratio * ratio - 1.0).max(0.0).floor() as u32)
}

/// All modes confined on the face (see [`max_confined_family`]) with
/// frequency in `[f_min_hz, f_max_hz]`, ordered by `(Ω, n, p, l)`.
/// `loss_angle` overrides the overtone defaults.
pub fn enumerate_modes(
    geom: &PlanoConvexGeometry,
    mat: &Material,
    f_min_hz: f64,
    f_max_hz: f64,
    loss_angle: Option<f64>,
) -> Result<Vec<Mode>> {
    require_paraxial(geom)?;
    if !(f_min_hz <= f_max_hz) {
        return Ok(Vec::new());
    }
    let w_max = 2.0 * PI * f_max_hz;
    let w_min = 2.0 * PI * f_min_hz;
    let mut modes = Vec::new();
    let mut n = 1;
    while family_frequency(geom, mat, n, 0) <= w_max {
        let max_family = max_confined_family(geom, n)?;
        for family in 0..=max_family {
            let omega = family_frequency(geom, mat, n, family);
            if omega > w_max {
                break;
            }
            if omega >= w_min {
                for p in 0..=family / 2 {
                    let idx = GaussIndex::new(n, p, family - 2 * p)?;
                    let shape = GaussianShape::new(geom, idx)?;
                    let mass = modal_mass(geom, mat, idx)?;
                    let phi = loss_angle.unwrap_or_else(|| default_loss_angle(n));
                    modes.push(Mode::new(ModeIndex::Gauss(idx), omega, phi, mass, ModeShape::Gaussian(shape))?);
                }
            }
        }
        n += 1;
    }
    modes.sort_by(|a, b| a.omega().total_cmp(&b.omega()).then(a.index.cmp(&b.index)));
    Ok(modes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mirror_a() -> PlanoConvexGeometry {
        PlanoConvexGeometry::new(34e-3, 150e-3, 2.65e-3).unwrap()
    }

    fn mirror_b() -> PlanoConvexGeometry {
        PlanoConvexGeometry::new(12e-3, 180e-3, 1.55e-3).unwrap()
    }

    #[test]
    fn laguerre_low_orders() {
        for l in 0..5 {
            for &x in &[0.0, 0.7, 3.2] {
                assert_eq!(laguerre(0, l, x), 1.0);
                assert!((laguerre(1, l, x) - (1.0 + l as f64 - x)).abs() < 1e-14);
            }
        }
        assert!((laguerre(2, 0, 2.0) + 1.0).abs() < 1e-14);
    }

    #[test]
    fn laguerre_matches_explicit_sum() {
        // L_p^l(x) = Σ_k (-1)^k C(p+l, p-k) x^k / k!
        fn binom(n: u32, k: u32) -> f64 {
            (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
        }
        for p in 0..7 {
            for l in 0..5 {
                let x: f64 = 1.3;
                let mut direct = 0.0;
                let mut fact = 1.0;
                for k in 0..=p {
                    if k > 0 {
                        fact *= k as f64;
                    }
                    direct += (-1.0f64).powi(k as i32) * binom(p + l, p - k) * x.powi(k as i32) / fact;
                }
                assert!((laguerre(p, l, x) - direct).abs() < 1e-12 * direct.abs().max(1.0));
            }
        }
    }

    #[test]
    fn waists_of_both_mirrors() {
        let a = mirror_a();
        assert!((acoustic_waist(&a, 1).unwrap() - 5.8e-3).abs() < 0.01 * 5.8e-3);
        assert!((acoustic_waist(&a, 2).unwrap() - 4.1e-3).abs() < 0.01 * 4.1e-3);
        assert!((acoustic_waist(&mirror_b(), 4).unwrap() - 2.0e-3).abs() < 0.02 * 2.0e-3);
    }

    #[test]
    fn non_paraxial_geometry_is_rejected() {
        let thick = PlanoConvexGeometry::new(10e-3, 40e-3, 3e-3).unwrap();
        assert!(acoustic_waist(&thick, 1).is_err());
    }

    #[test]
    fn surface_profiles() {
        let g = mirror_b();
        let s = GaussianShape::new(&g, GaussIndex::new(4, 0, 2).unwrap()).unwrap();
        assert_eq!(s.surface(0.0, 0.3), 0.0);
        let s = GaussianShape::new(&g, GaussIndex::new(4, 0, 0).unwrap()).unwrap();
        let w = s.waist();
        for &r in &[0.0, 0.5e-3, 2e-3, 4e-3] {
            assert!((s.surface(r, 1.0) - (-(r / w).powi(2)).exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn displacement_checks_the_body() {
        let g = mirror_a();
        let idx = GaussIndex::new(1, 0, 0).unwrap();
        assert!((displacement(&g, idx, 0.0, 0.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((displacement(&g, idx, 0.0, 0.0, 2.65e-3).unwrap() + 1.0).abs() < 1e-12);
        assert!(displacement(&g, idx, 0.0, 0.0, 2.7e-3).is_err());
        assert!(displacement(&g, idx, 18e-3, 0.0, 0.0).is_err());
    }

    #[test]
    fn mass_cross_check_against_closed_form() {
        let g = mirror_b();
        let m = Material::fused_silica();
        let numeric = modal_mass(&g, &m, GaussIndex::new(4, 0, 0).unwrap()).unwrap();
        let closed = fundamental_mass_estimate(&g, &m, 4).unwrap();
        // the numerical mass sees the thinning of the convex cap
        let w = acoustic_waist(&g, 4).unwrap();
        let thinning = w * w / (4.0 * g.curvature_radius() * g.center_thickness());
        assert!((numeric / closed - (1.0 - thinning)).abs() < 2e-3, "{numeric} vs {closed}");
    }

    #[test]
    fn enumeration_window() {
        let g = mirror_a();
        let m = Material::fused_silica();
        assert!(enumerate_modes(&g, &m, 2.0e5, 1.0e5, None).unwrap().is_empty());
        let modes = enumerate_modes(&g, &m, 1.0e6, 1.3e6, None).unwrap();
        assert_eq!(modes[0].index, ModeIndex::Gauss(GaussIndex { n: 1, p: 0, l: 0 }));
        assert!((modes[0].quality_factor() - DEFAULT_Q_ODD).abs() < 1e-6);
        assert!(modes.windows(2).all(|w| w[0].omega() <= w[1].omega()));
    }

    #[test]
    fn confinement_limits_the_families() {
        let g = PlanoConvexGeometry::new(12e-3, 180e-3, 1.55e-3).unwrap();
        // w_4 is close to 2 mm on a 6 mm radius face
        assert_eq!(max_confined_family(&g, 4).unwrap(), 7);
        let m = Material::fused_silica();
        let modes = enumerate_modes(&g, &m, 1e6, 9e6, None).unwrap();
        for md in &modes {
            let ModeIndex::Gauss(idx) = md.index else { panic!() };
            let w = acoustic_waist(&g, idx.n).unwrap();
            assert!(w * ((idx.family() + 1) as f64).sqrt() <= g.radius());
        }
    }
}
