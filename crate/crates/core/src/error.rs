use thiserror::Error;

/// Errors raised by the simulator core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid material: {0}")]
    InvalidMaterial(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid beam: {0}")]
    InvalidBeam(String),

    #[error("{quantity} = {value:e} is outside the admissible range [{min:e}, {max:e}]")]
    OutOfRange {
        quantity: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("unstable cavity: length {length:e} m must be shorter than the coupler curvature radius {curvature:e} m")]
    UnstableCavity { length: f64, curvature: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("Ritz solution not converged for mode {mode}: relative frequency shift {shift:.3e} exceeds {tolerance:.1e}")]
    Convergence {
        mode: String,
        shift: f64,
        tolerance: f64,
    },

    #[error("mode classification failed: {0}")]
    Classification(String),

    #[error("fit failed: {0}")]
    FitFailure(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_positive(quantity: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::OutOfRange {
            quantity,
            value,
            min: f64::MIN_POSITIVE,
            max: f64::INFINITY,
        })
    }
}
