//! Materials, geometries, beams, the thermal environment and the shared
//! [`Mode`] record.

mod beam;
mod environment;
mod geometry;
mod material;
mod mode;
pub mod quadrature;

pub use beam::{cavity_waist, OpticalBeam};
pub use environment::{Environment, BOLTZMANN, SPEED_OF_LIGHT};
pub use geometry::{CylinderGeometry, PlanoConvexGeometry, PARAXIAL_MIN_RATIO};
pub use material::{longitudinal_velocity, parse_library, Material, FUSED_SILICA};
pub use mode::{
    normalization_peak, Mode, ModeIndex, ModeShape, PolarGrid, MAX_LOSS_ANGLE, NORMALIZATION_SAMPLES,
};
