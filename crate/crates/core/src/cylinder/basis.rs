//! Separable polynomial trial functions for one circumferential block.
//!
//! For circumferential order `n` the cosine branch of the displacement is
//!
//! ```text
//! u_r = U(r, z) cos nθ,   u_θ = V(r, z) sin nθ,   u_z = W(r, z) cos nθ
//! ```
//!
//! A field is smooth on the axis only if `U + V ∝ r^(n+1) f(r², z)`,
//! `U - V ∝ r^|n-1| g(r², z)` and `W ∝ r^n h(r², z)`. The trial functions
//! follow that structure exactly, with shifted Legendre polynomials in `r²`
//! and Legendre polynomials in `z`, so every strain component is a
//! polynomial and Gauss–Legendre quadrature integrates the energies exactly.

use super::Parity;
use crate::model::quadrature::legendre_with_derivative;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Kind {
    /// `U = V = φ` (n ≥ 1)
    Sum,
    /// `U = φ, V = -φ` (n ≥ 1)
    Diff,
    /// `U = φ` (n = 0)
    Radial,
    /// `W = φ`
    Axial,
    /// `V = φ` (n = 0 torsion)
    Twist,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct BasisFn {
    pub kind: Kind,
    pub power: u32,
    pub i: usize,
    pub j: usize,
}

/// Values and physical derivatives of `(U, V, W)` at one point.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct FieldSample {
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub u_r: f64,
    pub v_r: f64,
    pub w_r: f64,
    pub u_z: f64,
    pub v_z: f64,
    pub w_z: f64,
}

impl FieldSample {
    pub fn add_scaled(&mut self, other: &FieldSample, c: f64) {
        self.u += c * other.u;
        self.v += c * other.v;
        self.w += c * other.w;
        self.u_r += c * other.u_r;
        self.v_r += c * other.v_r;
        self.w_r += c * other.w_r;
        self.u_z += c * other.u_z;
        self.v_z += c * other.v_z;
        self.w_z += c * other.w_z;
    }
}

/// Trial space of one `(n, parity)` block (or the n = 0 torsional block).
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct BlockBasis {
    pub n: u32,
    pub parity: Parity,
    pub torsional: bool,
    pub order: usize,
    pub funcs: Vec<BasisFn>,
}

impl BlockBasis {
    /// `order` radial functions and axial degrees `0..=order` of the
    /// admissible parity. Spaces are nested in `order`.
    pub fn new(n: u32, parity: Parity, torsional: bool, order: usize) -> Self {
        // parity of U, V in z; W carries the opposite parity
        let in_plane = match parity {
            Parity::Extensional => 0,
            Parity::Flexural => 1,
        };
        let axial = 1 - in_plane;
        let degrees = |par: usize| (0..=order).filter(move |j| j % 2 == par);
        let mut funcs = Vec::new();
        for i in 0..order {
            if torsional {
                for j in degrees(in_plane) {
                    funcs.push(BasisFn { kind: Kind::Twist, power: 1, i, j });
                }
            } else if n == 0 {
                for j in degrees(in_plane) {
                    funcs.push(BasisFn { kind: Kind::Radial, power: 1, i, j });
                }
                for j in degrees(axial) {
                    funcs.push(BasisFn { kind: Kind::Axial, power: 0, i, j });
                }
            } else {
                for j in degrees(in_plane) {
                    funcs.push(BasisFn { kind: Kind::Sum, power: n + 1, i, j });
                    funcs.push(BasisFn { kind: Kind::Diff, power: n - 1, i, j });
                }
                for j in degrees(axial) {
                    funcs.push(BasisFn { kind: Kind::Axial, power: n, i, j });
                }
            }
        }
        Self {
            n,
            parity,
            torsional,
            order,
            funcs,
        }
    }

    pub fn len(&self) -> usize {
        self.funcs.len()
    }
}

/// Radial factor `ρ^k P_i(2ρ² - 1)` and its `ρ`-derivative.
pub(crate) fn radial_factor(power: u32, i: usize, rho: f64) -> (f64, f64) {
    let (p, dp) = legendre_with_derivative(i, 2.0 * rho * rho - 1.0);
    let rk = rho.powi(power as i32);
    let drk = if power == 0 {
        0.0
    } else {
        power as f64 * rho.powi(power as i32 - 1)
    };
    (rk * p, drk * p + rk * dp * 4.0 * rho)
}

/// Evaluates one trial function at scaled coordinates `ρ = r/a`,
/// `ζ = 2z/h`; derivatives are with respect to physical `r` and `z`.
pub(crate) fn evaluate(f: &BasisFn, rho: f64, zeta: f64, radius: f64, thickness: f64) -> FieldSample {
    let (g, dg) = radial_factor(f.power, f.i, rho);
    let (pz, dpz) = legendre_with_derivative(f.j, zeta);
    let phi = g * pz;
    let phi_r = dg * pz / radius;
    let phi_z = g * dpz * 2.0 / thickness;
    let mut s = FieldSample::default();
    match f.kind {
        Kind::Sum => {
            s.u = phi;
            s.u_r = phi_r;
            s.u_z = phi_z;
            s.v = phi;
            s.v_r = phi_r;
            s.v_z = phi_z;
        }
        Kind::Diff => {
            s.u = phi;
            s.u_r = phi_r;
            s.u_z = phi_z;
            s.v = -phi;
            s.v_r = -phi_r;
            s.v_z = -phi_z;
        }
        Kind::Radial => {
            s.u = phi;
            s.u_r = phi_r;
            s.u_z = phi_z;
        }
        Kind::Axial => {
            s.w = phi;
            s.w_r = phi_r;
            s.w_z = phi_z;
        }
        Kind::Twist => {
            s.v = phi;
            s.v_r = phi_r;
            s.v_z = phi_z;
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spaces_are_nested() {
        for n in 0..4 {
            for parity in [Parity::Extensional, Parity::Flexural] {
                let small = BlockBasis::new(n, parity, false, 6);
                let big = BlockBasis::new(n, parity, false, 8);
                assert!(small.funcs.iter().all(|f| big.funcs.contains(f)));
            }
        }
    }

    #[test]
    fn radial_derivative_matches_finite_difference() {
        for (k, i) in [(0, 3), (1, 2), (4, 5)] {
            let rho = 0.37;
            let eps = 1e-6;
            let (_, d) = radial_factor(k, i, rho);
            let fd = (radial_factor(k, i, rho + eps).0 - radial_factor(k, i, rho - eps).0) / (2.0 * eps);
            assert!((d - fd).abs() < 1e-6 * (1.0 + d.abs()), "k={k} i={i}: {d} vs {fd}");
        }
    }
}
