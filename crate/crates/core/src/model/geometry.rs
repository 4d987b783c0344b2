use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};

/// Minimum convex curvature radius to centre thickness ratio accepted by the
/// paraxial (gaussian-mode) solver.
pub const PARAXIAL_MIN_RATIO: f64 = 20.0;

/// Right circular cylinder, both faces flat.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylinderGeometry {
    radius: f64,
    thickness: f64,
}

impl CylinderGeometry {
    pub fn new(radius: f64, thickness: f64) -> Result<Self> {
        ensure_positive("cylinder radius", radius)?;
        ensure_positive("cylinder thickness", thickness)?;
        Ok(Self { radius, thickness })
    }

    pub fn from_diameter(diameter: f64, thickness: f64) -> Result<Self> {
        Self::new(diameter / 2.0, thickness)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn thickness(&self) -> f64 {
        self.thickness
    }

    pub fn volume(&self) -> f64 {
        std::f64::consts::PI * self.radius * self.radius * self.thickness
    }

    /// Uniform scaling of every dimension.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.radius * factor, self.thickness * factor)
    }
}

/// Plano-convex substrate: flat coated face at `z = 0`, spherical convex back.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanoConvexGeometry {
    diameter: f64,
    curvature_radius: f64,
    center_thickness: f64,
}

impl PlanoConvexGeometry {
    /// Validates that the spherical cap is defined over the whole face and
    /// that the thickness stays positive up to the rim.
    pub fn new(diameter: f64, curvature_radius: f64, center_thickness: f64) -> Result<Self> {
        ensure_positive("plano-convex diameter", diameter)?;
        ensure_positive("convex curvature radius", curvature_radius)?;
        ensure_positive("centre thickness", center_thickness)?;
        let half = diameter / 2.0;
        if curvature_radius <= half {
            return Err(Error::InvalidGeometry(format!(
                "curvature radius {curvature_radius} m must exceed the face radius {half} m"
            )));
        }
        let geom = Self {
            diameter,
            curvature_radius,
            center_thickness,
        };
        if geom.sagitta(half) >= center_thickness {
            return Err(Error::InvalidGeometry(format!(
                "sagitta {:.4e} m at the rim consumes the centre thickness {center_thickness} m",
                geom.sagitta(half)
            )));
        }
        Ok(geom)
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn radius(&self) -> f64 {
        self.diameter / 2.0
    }

    pub fn curvature_radius(&self) -> f64 {
        self.curvature_radius
    }

    pub fn center_thickness(&self) -> f64 {
        self.center_thickness
    }

    fn sagitta(&self, r: f64) -> f64 {
        let big_r = self.curvature_radius;
        // R - sqrt(R² - r²) without cancellation
        r * r / (big_r + (big_r * big_r - r * r).sqrt())
    }

    /// Thickness `h(r) = h0 - (R - sqrt(R² - r²))` for `0 <= r <= d/2`.
    pub fn thickness_at(&self, r: f64) -> Result<f64> {
        if !(0.0..=self.radius()).contains(&r) {
            return Err(Error::OutOfRange {
                quantity: "radial position",
                value: r,
                min: 0.0,
                max: self.radius(),
            });
        }
        Ok(self.center_thickness - self.sagitta(r))
    }

    /// Whether `R / h0` is large enough for the paraxial gaussian modes.
    pub fn is_paraxial(&self) -> bool {
        self.curvature_radius / self.center_thickness >= PARAXIAL_MIN_RATIO
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.diameter * factor,
            self.curvature_radius * factor,
            self.center_thickness * factor,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn thickness_profile() {
        let g = PlanoConvexGeometry::new(34e-3, 150e-3, 2.65e-3).unwrap();
        assert_eq!(g.thickness_at(0.0).unwrap(), 2.65e-3);
        let direct = 2.65e-3 - (0.15 - (0.15f64 * 0.15 - 0.01 * 0.01).sqrt());
        assert_relative_eq!(g.thickness_at(10e-3).unwrap(), direct, max_relative = 1e-12);
        assert_relative_eq!(g.thickness_at(10e-3).unwrap(), 2.3162e-3, max_relative = 1e-4);
        assert!(g.thickness_at(17.1e-3).is_err());
        assert!(g.thickness_at(-1e-9).is_err());
        assert!(g.is_paraxial());
    }

    #[test]
    fn rejects_vanishing_rim() {
        // sagitta at 17 mm on R = 150 mm is ~0.97 mm
        assert!(matches!(
            PlanoConvexGeometry::new(34e-3, 150e-3, 0.9e-3),
            Err(Error::InvalidGeometry(_))
        ));
        assert!(PlanoConvexGeometry::new(34e-3, 16e-3, 20e-3).is_err());
    }

    #[test]
    fn cylinder_validation() {
        assert!(CylinderGeometry::new(0.0, 1.0).is_err());
        assert!(CylinderGeometry::new(1.0, -1.0).is_err());
        let c = CylinderGeometry::from_diameter(25.4e-3, 6.35e-3).unwrap();
        assert_relative_eq!(c.radius(), 12.7e-3);
    }
}
