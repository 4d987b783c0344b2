//! Assembly and solution of the per-block generalized eigenproblem
//! `K q = ω² M q`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use super::basis::{evaluate, BlockBasis};
use super::Parity;
use crate::error::{Error, Result};
use crate::model::quadrature::gauss_legendre;
use crate::model::{CylinderGeometry, Material};

/// Eigen-decomposition of one circumferential block.
#[derive(Debug, Clone)]
pub struct BlockSolution {
    pub(crate) basis: BlockBasis,
    /// Squared angular frequencies, ascending. Rigid-body modes appear as
    /// (numerically) zero entries.
    pub eigenvalues: Vec<f64>,
    /// Columns are mass-orthonormal coefficient vectors.
    pub vectors: DMatrix<f64>,
    pub mass: DMatrix<f64>,
    pub stiffness: DMatrix<f64>,
}

impl BlockSolution {
    pub fn n(&self) -> u32 {
        self.basis.n
    }

    pub fn parity(&self) -> Parity {
        self.basis.parity
    }

    pub fn is_torsional(&self) -> bool {
        self.basis.torsional
    }

    pub fn basis_len(&self) -> usize {
        self.basis.len()
    }

    /// Signed frequencies `sign(ω²) sqrt|ω²| / 2π` in Hz.
    pub fn frequencies_hz(&self) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .map(|&l| l.signum() * l.abs().sqrt() / (2.0 * PI))
            .collect()
    }

    /// `⟨q_i, q_j⟩_M` for two eigenvector columns.
    pub fn mass_inner(&self, i: usize, j: usize) -> f64 {
        let qi = self.vectors.column(i);
        let qj = self.vectors.column(j);
        (qi.transpose() * &self.mass * qj)[(0, 0)]
    }
}

/// Angular integrals of `cos² nθ` and `sin² nθ` for the block.
fn angular_weights(n: u32, torsional: bool) -> (f64, f64) {
    if torsional {
        (0.0, 2.0 * PI)
    } else if n == 0 {
        (2.0 * PI, 0.0)
    } else {
        (PI, PI)
    }
}

pub(crate) fn quadrature_orders(order: usize, n: u32, requested: Option<usize>) -> (usize, usize) {
    let min = requested.unwrap_or(0).max(2 * order);
    (min.max(2 * order + n as usize + 2), min.max(2 * order + 2))
}

pub(crate) fn solve_block(
    geom: &CylinderGeometry,
    mat: &Material,
    basis: BlockBasis,
    quadrature: Option<usize>,
) -> Result<BlockSolution> {
    let a = geom.radius();
    let h = geom.thickness();
    let n = basis.n as f64;
    let (nr, nz) = quadrature_orders(basis.order, basis.n, quadrature);
    let (xr, wr) = gauss_legendre(nr);
    let (xz, wz) = gauss_legendre(nz);
    let (c_cos, c_sin) = angular_weights(basis.n, basis.torsional);
    // r dr dz = (a² h / 2) ρ dρ dζ with ρ = (x + 1)/2 contributing a factor 1/2
    let jac = a * a * h / 4.0;

    let npts = nr * nz;
    let nf = basis.len();
    let mut comps: Vec<DMatrix<f64>> = (0..9).map(|_| DMatrix::zeros(npts, nf)).collect();
    for (ir, (&x, &wx)) in xr.iter().zip(&wr).enumerate() {
        let rho = 0.5 * (x + 1.0);
        let r = rho * a;
        for (iz, (&zeta, &wzeta)) in xz.iter().zip(&wz).enumerate() {
            let p = ir * nz + iz;
            let sw = (wx * wzeta * rho * jac).sqrt();
            let (sc, ss) = (sw * c_cos.sqrt(), sw * c_sin.sqrt());
            for (q, f) in basis.funcs.iter().enumerate() {
                let s = evaluate(f, rho, zeta, a, h);
                let e_rr = s.u_r;
                let e_tt = (s.u + n * s.v) / r;
                let e_zz = s.w_z;
                let g_rz = s.u_z + s.w_r;
                let g_rt = s.v_r - s.v / r - n * s.u / r;
                let g_tz = s.v_z - n * s.w / r;
                comps[0][(p, q)] = sc * e_rr;
                comps[1][(p, q)] = sc * e_tt;
                comps[2][(p, q)] = sc * e_zz;
                comps[3][(p, q)] = sc * g_rz;
                comps[4][(p, q)] = ss * g_rt;
                comps[5][(p, q)] = ss * g_tz;
                comps[6][(p, q)] = sc * s.u;
                comps[7][(p, q)] = ss * s.v;
                comps[8][(p, q)] = sc * s.w;
            }
        }
    }
    let gram = |m: &DMatrix<f64>| m.tr_mul(m);
    let trace = &comps[0] + &comps[1] + &comps[2];
    let lambda = mat.lambda();
    let mu = mat.mu();
    let mut stiffness = gram(&trace) * lambda;
    for c in &comps[0..3] {
        stiffness += gram(c) * (2.0 * mu);
    }
    for c in &comps[3..6] {
        stiffness += gram(c) * mu;
    }
    let mut mass = DMatrix::zeros(nf, nf);
    for c in &comps[6..9] {
        mass += gram(c);
    }
    mass *= mat.density();

    let (eigenvalues, vectors) = generalized_symmetric_eigen(&stiffness, &mass)?;
    Ok(BlockSolution {
        basis,
        eigenvalues,
        vectors,
        mass,
        stiffness,
    })
}

/// Solves `K q = λ M q` for symmetric `K` and positive-definite `M`.
/// Eigenvalues ascend; eigenvectors are `M`-orthonormal.
pub fn generalized_symmetric_eigen(
    k: &DMatrix<f64>,
    m: &DMatrix<f64>,
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let dim = m.nrows();
    // Jacobi scaling keeps the Cholesky factor well conditioned
    let scale: Vec<f64> = (0..dim).map(|i| 1.0 / m[(i, i)].sqrt()).collect();
    let scaled = |a: &DMatrix<f64>| DMatrix::from_fn(dim, dim, |i, j| a[(i, j)] * scale[i] * scale[j]);
    let ms = scaled(m);
    let ks = scaled(k);
    let chol = ms
        .cholesky()
        .ok_or_else(|| Error::LinearAlgebra("mass matrix is not positive definite".into()))?;
    let l = chol.l();
    let x = l
        .solve_lower_triangular(&ks)
        .ok_or_else(|| Error::LinearAlgebra("singular Cholesky factor".into()))?;
    let a = l
        .solve_lower_triangular(&x.transpose())
        .ok_or_else(|| Error::LinearAlgebra("singular Cholesky factor".into()))?;
    let a = (&a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let lt = l.transpose();
    let y = DMatrix::from_fn(dim, dim, |i, c| eig.eigenvectors[(i, order[c])]);
    let q = lt
        .solve_upper_triangular(&y)
        .ok_or_else(|| Error::LinearAlgebra("singular Cholesky factor".into()))?;
    let q = DMatrix::from_fn(dim, dim, |i, c| q[(i, c)] * scale[i]);
    Ok((order.iter().map(|&i| eig.eigenvalues[i]).collect(), q))
}
