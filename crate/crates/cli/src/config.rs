//! Run configuration: one TOML file with sections, overridden by flags.
//!
//! Lengths are given in millimetres (beam waists in micrometres, the optical
//! wavelength in nanometres) and frequencies in kilohertz, as the unit
//! suffix of every key says. Everything is converted to SI here, before any
//! computation starts.

use std::path::{Path, PathBuf};

use mirrormodes::cylinder::RitzConfig;
use mirrormodes::noise::FrequencyGrid;
use mirrormodes::scan::ScanConfig;
use mirrormodes::{CylinderGeometry, Environment, Material, ModeIndex, OpticalBeam, PlanoConvexGeometry};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Environment variable naming a directory of material libraries.
pub const MATERIAL_DIR_VAR: &str = "MIRRORMODES_MATERIAL_DIR";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub material: MaterialSection,
    #[serde(default)]
    pub environment: EnvironmentSection,
    #[serde(default)]
    pub cylinder: CylinderSection,
    #[serde(default)]
    pub mirror: MirrorSection,
    #[serde(default)]
    pub beam: BeamSection,
    #[serde(default)]
    pub catalog: CatalogSection,
    #[serde(default)]
    pub spectrum: SpectrumSection,
    #[serde(default)]
    pub scan: ScanSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default)]
    pub profile: ProfileSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSection {
    pub name: Option<String>,
    /// Material library to search before the default directory.
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentSection {
    pub temperature_k: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CylinderSection {
    pub diameter_mm: Option<f64>,
    pub thickness_mm: Option<f64>,
    pub basis_order: Option<usize>,
    pub n_max: Option<u32>,
    pub f_min_khz: Option<f64>,
    pub f_max_khz: Option<f64>,
    pub q: Option<f64>,
    pub convergence_tol: Option<f64>,
}

/// Plano-convex substrate.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MirrorSection {
    pub diameter_mm: Option<f64>,
    pub curvature_radius_mm: Option<f64>,
    pub center_thickness_mm: Option<f64>,
    pub f_min_khz: Option<f64>,
    pub f_max_khz: Option<f64>,
    /// Overrides the per-overtone default quality factors.
    pub q: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamSection {
    pub waist_um: Option<f64>,
    pub wavelength_nm: Option<f64>,
    pub offset_x_mm: Option<f64>,
    pub offset_y_mm: Option<f64>,
}

/// Sampling of the face shapes stored in catalogs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogSection {
    pub grid_r: Option<usize>,
    pub grid_theta: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    pub f_start_khz: Option<f64>,
    pub f_stop_khz: Option<f64>,
    pub points: Option<usize>,
    pub rbw_hz: Option<f64>,
    pub add_noise: Option<bool>,
    /// White measurement floor (m²/Hz) added with `add_noise`; defaults to
    /// the median of the thermal spectrum.
    pub noise_floor: Option<f64>,
    /// Number of averaged periodograms behind each bin.
    pub averages: Option<u32>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    pub mode: Option<String>,
    pub lines: Option<usize>,
    pub speed_mm_s: Option<f64>,
    pub power_w: Option<f64>,
    pub spot_waist_um: Option<f64>,
    pub spacing_mm: Option<f64>,
    pub low_pass: Option<bool>,
    pub finite_spot: Option<bool>,
    pub drive_khz: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    /// Peak threshold in units of the spectrum median.
    pub threshold: Option<f64>,
    /// Relative tolerance of the mode assignment.
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSection {
    /// Fixed waist; the waist is fitted when absent.
    pub waist_mm: Option<f64>,
    pub node_guard: Option<f64>,
    pub bin_width_mm: Option<f64>,
}

const MM: f64 = 1e-3;
const KHZ: f64 = 1e3;

fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

fn positive(key: &str, value: f64) -> CliResult<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(CliError::Usage(format!("{key} must be a positive number, got {value}")))
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
                .unwrap_or(0);
            CliError::Usage(format!("config line {line}: {}", e.message()))
        })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Usage(msg) => CliError::Usage(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn material(&self) -> CliResult<Material> {
        let name = self.material.name.as_deref().unwrap_or(mirrormodes::model::FUSED_SILICA);
        if let Some(file) = &self.material.file {
            if let Some(m) = find_in_file(file, name)? {
                return Ok(m);
            }
        }
        if let Ok(dir) = std::env::var(MATERIAL_DIR_VAR) {
            let dir = PathBuf::from(dir);
            let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
                .map_err(|e| CliError::io(&dir, e))?
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "toml"))
                .collect();
            files.sort();
            for file in files {
                if let Some(m) = find_in_file(&file, name)? {
                    return Ok(m);
                }
            }
        }
        Material::bundled(name).ok_or_else(|| CliError::Usage(format!("unknown material `{name}`")))
    }

    pub fn environment(&self) -> CliResult<Environment> {
        Ok(Environment::new(self.environment.temperature_k.unwrap_or(300.0)).map_err(usage)?)
    }

    pub fn cylinder_geometry(&self) -> CliResult<CylinderGeometry> {
        let c = &self.cylinder;
        let d = positive("cylinder.diameter_mm", c.diameter_mm.unwrap_or(25.4))?;
        let h = positive("cylinder.thickness_mm", c.thickness_mm.unwrap_or(6.35))?;
        CylinderGeometry::from_diameter(d * MM, h * MM).map_err(usage)
    }

    pub fn ritz(&self) -> CliResult<RitzConfig> {
        let c = &self.cylinder;
        let base = RitzConfig::default();
        let q = positive("cylinder.q", c.q.unwrap_or(1.0 / base.loss_angle))?;
        let cfg = RitzConfig {
            basis_order: c.basis_order.unwrap_or(base.basis_order),
            n_max: c.n_max.unwrap_or(base.n_max),
            f_min_hz: c.f_min_khz.map_or(base.f_min_hz, |f| f * KHZ),
            f_max_hz: c.f_max_khz.map_or(base.f_max_hz, |f| f * KHZ),
            convergence_tol: c.convergence_tol.unwrap_or(base.convergence_tol),
            loss_angle: 1.0 / q,
            ..base
        };
        cfg.validate().map_err(usage)?;
        Ok(cfg)
    }

    pub fn mirror_geometry(&self) -> CliResult<PlanoConvexGeometry> {
        let m = &self.mirror;
        let d = positive("mirror.diameter_mm", m.diameter_mm.unwrap_or(34.0))?;
        let r = positive("mirror.curvature_radius_mm", m.curvature_radius_mm.unwrap_or(150.0))?;
        let h = positive("mirror.center_thickness_mm", m.center_thickness_mm.unwrap_or(2.65))?;
        PlanoConvexGeometry::new(d * MM, r * MM, h * MM).map_err(usage)
    }

    /// Frequency window (Hz) and optional loss angle of the gaussian modes.
    pub fn mirror_window(&self) -> CliResult<(f64, f64, Option<f64>)> {
        let m = &self.mirror;
        let lo = m.f_min_khz.unwrap_or(1000.0);
        let hi = m.f_max_khz.unwrap_or(1300.0);
        if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
            return Err(CliError::Usage(format!(
                "mirror frequency window [{lo}, {hi}] kHz must satisfy 0 <= f_min_khz < f_max_khz"
            )));
        }
        let phi = match m.q {
            Some(q) => {
                let q = positive("mirror.q", q)?;
                if q < 10.0 {
                    return Err(CliError::Usage(format!("mirror.q = {q} must be at least 10")));
                }
                Some(1.0 / q)
            }
            None => None,
        };
        Ok((lo * KHZ, hi * KHZ, phi))
    }

    pub fn beam(&self) -> CliResult<OpticalBeam> {
        let b = &self.beam;
        let w = positive("beam.waist_um", b.waist_um.unwrap_or(62.5))?;
        let lambda = positive("beam.wavelength_nm", b.wavelength_nm.unwrap_or(810.0))?;
        let x = b.offset_x_mm.unwrap_or(0.0);
        let y = b.offset_y_mm.unwrap_or(0.0);
        if !(x.is_finite() && y.is_finite()) {
            return Err(CliError::Usage("beam offsets must be finite".into()));
        }
        Ok(OpticalBeam::new(w * 1e-6, lambda * 1e-9)
            .map_err(usage)?
            .with_offset(x * MM, y * MM))
    }

    pub fn catalog_grid(&self) -> CliResult<(usize, usize)> {
        let n_r = self.catalog.grid_r.unwrap_or(65);
        let n_theta = self.catalog.grid_theta.unwrap_or(96);
        if n_r < 2 || n_theta < 4 {
            return Err(CliError::Usage(format!(
                "catalog grid {n_r}x{n_theta} needs grid_r >= 2 and grid_theta >= 4"
            )));
        }
        Ok((n_r, n_theta))
    }

    pub fn frequency_grid(&self) -> CliResult<FrequencyGrid> {
        let s = &self.spectrum;
        let start = s.f_start_khz.unwrap_or(10.0);
        let stop = s.f_stop_khz.unwrap_or(500.0);
        let points = s.points.unwrap_or(98_001);
        if !(start > 0.0 && stop > start && stop.is_finite()) {
            return Err(CliError::Usage(format!(
                "spectrum window [{start}, {stop}] kHz must satisfy 0 < f_start_khz < f_stop_khz"
            )));
        }
        if points < 2 {
            return Err(CliError::Usage("spectrum.points must be at least 2".into()));
        }
        FrequencyGrid::linspace(start * KHZ, stop * KHZ, points).map_err(usage)
    }

    pub fn rbw(&self) -> CliResult<Option<f64>> {
        self.spectrum.rbw_hz.map(|r| positive("spectrum.rbw_hz", r)).transpose()
    }

    pub fn noise(&self) -> CliResult<Option<NoiseSettings>> {
        let s = &self.spectrum;
        if !s.add_noise.unwrap_or(false) {
            return Ok(None);
        }
        let floor = s.noise_floor.map(|f| positive("spectrum.noise_floor", f)).transpose()?;
        let averages = s.averages.unwrap_or(100);
        if averages == 0 {
            return Err(CliError::Usage("spectrum.averages must be at least 1".into()));
        }
        Ok(Some(NoiseSettings {
            floor,
            averages,
            seed: s.seed.unwrap_or(0),
        }))
    }

    pub fn scan_mode(&self) -> CliResult<ModeIndex> {
        let text = self
            .scan
            .mode
            .as_deref()
            .ok_or_else(|| CliError::Usage("no mode to scan; set scan.mode or pass --mode".into()))?;
        ModeIndex::parse(text).map_err(usage)
    }

    pub fn scan(&self) -> CliResult<ScanConfig> {
        let s = &self.scan;
        let base = ScanConfig::default();
        let cfg = ScanConfig {
            lines: s.lines.unwrap_or(base.lines),
            speed: s.speed_mm_s.map_or(base.speed, |v| v * MM),
            omega_mod: s
                .drive_khz
                .map(|f| positive("scan.drive_khz", f).map(|f| 2.0 * std::f64::consts::PI * f * KHZ))
                .transpose()?,
            power: s.power_w.unwrap_or(base.power),
            spot_waist: s.spot_waist_um.map_or(base.spot_waist, |w| w * 1e-6),
            sample_spacing: s.spacing_mm.map_or(base.sample_spacing, |v| v * MM),
            low_pass: s.low_pass.unwrap_or(base.low_pass),
            finite_spot: s.finite_spot.unwrap_or(base.finite_spot),
        };
        cfg.validate().map_err(usage)?;
        Ok(cfg)
    }

    pub fn threshold(&self) -> CliResult<f64> {
        positive("analysis.threshold", self.analysis.threshold.unwrap_or(5.0))
    }

    pub fn tolerance(&self) -> CliResult<f64> {
        let t = self.analysis.tolerance.unwrap_or(0.03);
        if !(t > 0.0 && t <= 0.1) {
            return Err(CliError::Usage(format!("analysis.tolerance = {t} must lie in (0, 0.1]")));
        }
        Ok(t)
    }

    pub fn profile_settings(&self) -> CliResult<ProfileSettings> {
        let p = &self.profile;
        let node_guard = p.node_guard.unwrap_or(mirrormodes::analysis::profile::DEFAULT_NODE_GUARD);
        if !(0.0..1.0).contains(&node_guard) {
            return Err(CliError::Usage(format!("profile.node_guard = {node_guard} must lie in [0, 1)")));
        }
        Ok(ProfileSettings {
            waist: p.waist_mm.map(|w| positive("profile.waist_mm", w).map(|w| w * MM)).transpose()?,
            node_guard,
            bin_width: p
                .bin_width_mm
                .map(|w| positive("profile.bin_width_mm", w).map(|w| w * MM))
                .transpose()?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSettings {
    pub floor: Option<f64>,
    pub averages: u32,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSettings {
    pub waist: Option<f64>,
    pub node_guard: f64,
    pub bin_width: Option<f64>,
}

fn find_in_file(path: &Path, name: &str) -> CliResult<Option<Material>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let library = mirrormodes::model::parse_library(&text).map_err(|e| match e {
        mirrormodes::Error::Parse { line, message } => CliError::parse(path, line, message),
        other => CliError::Usage(format!("{}: {other}", path.display())),
    })?;
    Ok(library.into_iter().find(|m| m.name() == name))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_describe_the_reference_setups() {
        let cfg = RunConfig::default();
        let g = cfg.cylinder_geometry().unwrap();
        assert!((g.radius() - 12.7e-3).abs() < 1e-15);
        let m = cfg.mirror_geometry().unwrap();
        assert!((m.curvature_radius() - 0.15).abs() < 1e-15);
        assert_eq!(cfg.beam().unwrap().waist(), 62.5e-6);
        assert_eq!(cfg.material().unwrap().name(), "fused_silica");
        assert_eq!(cfg.frequency_grid().unwrap().len(), 98_001);
    }

    #[test]
    fn unknown_keys_are_rejected_with_a_line() {
        let err = RunConfig::parse("[cylinder]\ndiameter_mm = 20\nradius_mm = 3\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3"), "{msg}");
        assert_eq!(err.exit_code(), 2);
        assert!(RunConfig::parse("[nonsense]\n").is_err());
    }

    #[test]
    fn units_are_converted_at_the_boundary() {
        let cfg = RunConfig::parse(
            "[mirror]\ndiameter_mm = 12\ncurvature_radius_mm = 180\ncenter_thickness_mm = 1.55\n\
             f_min_khz = 7000\nf_max_khz = 8000\n[beam]\nwaist_um = 100\noffset_x_mm = 1.5\n",
        )
        .unwrap();
        let g = cfg.mirror_geometry().unwrap();
        assert!((g.center_thickness() - 1.55e-3).abs() < 1e-18);
        let (lo, hi, phi) = cfg.mirror_window().unwrap();
        assert_eq!((lo, hi, phi), (7e6, 8e6, None));
        let b = cfg.beam().unwrap();
        assert!((b.waist() - 1e-4).abs() < 1e-18);
        assert!((b.offset().0 - 1.5e-3).abs() < 1e-18);
    }

    #[test]
    fn invalid_values_are_usage_errors() {
        let cfg = RunConfig::parse("[cylinder]\nbasis_order = 2\n").unwrap();
        assert_eq!(cfg.ritz().unwrap_err().exit_code(), 2);
        let cfg = RunConfig::parse("[spectrum]\nf_start_khz = 10\nf_stop_khz = 5\n").unwrap();
        assert_eq!(cfg.frequency_grid().unwrap_err().exit_code(), 2);
        let cfg = RunConfig::parse("[analysis]\ntolerance = 0.5\n").unwrap();
        assert!(cfg.tolerance().is_err());
    }

    #[test]
    fn material_library_file_is_searched_first() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lib.toml");
        std::fs::write(&path, "[bk7]\nrho = 2510.0\nE = 82e9\nnu = 0.206\n").unwrap();
        let mut cfg = RunConfig::default();
        cfg.material.name = Some("bk7".into());
        assert!(cfg.material().is_err());
        cfg.material.file = Some(path);
        assert_eq!(cfg.material().unwrap().density(), 2510.0);
    }
}
