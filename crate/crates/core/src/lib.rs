//! Forward and inverse modelling of the acoustic modes of mirror substrates.
//!
//! The crate predicts the internal vibration modes of cylindrical and
//! plano-convex mirrors, synthesizes the thermally driven displacement
//! spectrum sensed by a probe beam, simulates radiation-pressure raster scans
//! of mode shapes, and recovers modal parameters (frequency, quality factor,
//! effective mass, acoustic waist) from spectra and maps.
//!
//! All quantities are SI internally: metres, kilograms, seconds, radians per
//! second for angular frequencies and hertz wherever a name says `_hz`.
//!
//! Nothing in this crate touches the filesystem; persistence lives in the
//! command-line crate.

pub mod analysis;
pub mod cylinder;
pub mod error;
pub mod gaussian;
pub mod model;
pub mod noise;
pub mod scan;

pub use error::{Error, Result};
pub use model::{
    CylinderGeometry, Environment, Material, Mode, ModeIndex, ModeShape, OpticalBeam,
    PlanoConvexGeometry, PolarGrid,
};
