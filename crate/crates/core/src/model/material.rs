//! Isotropic elastic materials and the key-value material file grammar.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const BUNDLED_LIBRARY: &str = include_str!("../../data/materials.toml");

/// Name of the default bundled material.
pub const FUSED_SILICA: &str = "fused_silica";

/// Isotropic elastic substrate described by its density and Lamé constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Material {
    name: String,
    density: f64,
    lambda: f64,
    mu: f64,
}

/// `sqrt((λ + 2μ)/ρ)`, refusing a non-positive argument under the root.
pub fn longitudinal_velocity(density: f64, lambda: f64, mu: f64) -> Result<f64> {
    let modulus = lambda + 2.0 * mu;
    if !(density > 0.0) || !density.is_finite() {
        return Err(Error::InvalidMaterial(format!(
            "density must be positive, got {density}"
        )));
    }
    if !(modulus > 0.0) || !modulus.is_finite() {
        return Err(Error::InvalidMaterial(format!(
            "longitudinal modulus λ + 2μ must be positive, got {modulus}"
        )));
    }
    Ok((modulus / density).sqrt())
}

impl Material {
    pub fn from_lame(name: impl Into<String>, density: f64, lambda: f64, mu: f64) -> Result<Self> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::InvalidMaterial(format!(
                "shear modulus μ must be positive, got {mu}"
            )));
        }
        if !lambda.is_finite() {
            return Err(Error::InvalidMaterial("λ must be finite".into()));
        }
        longitudinal_velocity(density, lambda, mu)?;
        Ok(Self {
            name: name.into(),
            density,
            lambda,
            mu,
        })
    }

    pub fn from_young_poisson(
        name: impl Into<String>,
        density: f64,
        young: f64,
        poisson: f64,
    ) -> Result<Self> {
        if !(young > 0.0) || !(-1.0 < poisson && poisson < 0.5) {
            return Err(Error::InvalidMaterial(format!(
                "need E > 0 and -1 < nu < 0.5, got E = {young}, nu = {poisson}"
            )));
        }
        let lambda = young * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
        let mu = young / (2.0 * (1.0 + poisson));
        Self::from_lame(name, density, lambda, mu)
    }

    /// The bundled fused-silica entry.
    pub fn fused_silica() -> Self {
        Self::bundled(FUSED_SILICA).expect("bundled material library contains fused_silica")
    }

    pub fn bundled(name: &str) -> Option<Self> {
        parse_library(BUNDLED_LIBRARY)
            .ok()?
            .into_iter()
            .find(|m| m.name == name)
    }

    pub fn bundled_library() -> Vec<Self> {
        parse_library(BUNDLED_LIBRARY).expect("bundled material library parses")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn longitudinal_velocity(&self) -> f64 {
        ((self.lambda + 2.0 * self.mu) / self.density).sqrt()
    }

    pub fn shear_velocity(&self) -> f64 {
        (self.mu / self.density).sqrt()
    }

    pub fn poisson_ratio(&self) -> f64 {
        self.lambda / (2.0 * (self.lambda + self.mu))
    }

    pub fn young_modulus(&self) -> f64 {
        self.mu * (3.0 * self.lambda + 2.0 * self.mu) / (self.lambda + self.mu)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaterialEntry {
    rho: f64,
    lambda: Option<f64>,
    mu: Option<f64>,
    #[serde(rename = "E")]
    young: Option<f64>,
    nu: Option<f64>,
    #[allow(dead_code)]
    note: Option<String>,
}

/// Parses a material library.
///
/// The grammar is a TOML document with one table per material:
///
/// ```text
/// [fused_silica]
/// rho = 2200.0          # kg/m^3
/// lambda = 1.60e10      # Pa   (with mu)
/// mu = 3.11e10          # Pa
/// # or: E = 72.7e9 and nu = 0.17
/// ```
///
/// Unknown keys and incomplete constant pairs are rejected.
pub fn parse_library(text: &str) -> Result<Vec<Material>> {
    let table: BTreeMap<String, MaterialEntry> =
        toml::from_str(text).map_err(|e| toml_error(text, &e))?;
    table
        .into_iter()
        .map(|(name, entry)| match entry {
            MaterialEntry {
                lambda: Some(lambda),
                mu: Some(mu),
                young: None,
                nu: None,
                rho,
                ..
            } => Material::from_lame(name, rho, lambda, mu),
            MaterialEntry {
                lambda: None,
                mu: None,
                young: Some(e),
                nu: Some(nu),
                rho,
                ..
            } => Material::from_young_poisson(name, rho, e, nu),
            _ => Err(Error::InvalidMaterial(format!(
                "material `{name}` must define exactly one of (lambda, mu) or (E, nu)"
            ))),
        })
        .collect()
}

pub(crate) fn toml_error(text: &str, err: &toml::de::Error) -> Error {
    let line = err
        .span()
        .map(|span| text[..span.start.min(text.len())].lines().count().max(1))
        .unwrap_or(0);
    Error::Parse {
        line,
        message: err.message().to_string(),
    }
}
