use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Result};

/// Boltzmann constant (J/K), exact SI value.
pub const BOLTZMANN: f64 = 1.380649e-23;

/// Speed of light in vacuum (m/s), exact SI value.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Thermal bath seen by the mirror.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    temperature: f64,
}

impl Environment {
    pub fn new(temperature: f64) -> Result<Self> {
        ensure_positive("temperature", temperature)?;
        Ok(Self { temperature })
    }

    pub fn room_temperature() -> Self {
        Self { temperature: 300.0 }
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn boltzmann(&self) -> f64 {
        BOLTZMANN
    }

    pub fn speed_of_light(&self) -> f64 {
        SPEED_OF_LIGHT
    }

    /// `k_B T` in joules.
    pub fn thermal_energy(&self) -> f64 {
        BOLTZMANN * self.temperature
    }
}

impl Default for Environment {
    fn default() -> Self {
        Self::room_temperature()
    }
}
