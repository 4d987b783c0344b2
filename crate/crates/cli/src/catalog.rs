//! Versioned JSON mode catalogs.
//!
//! A catalog is a JSON object with a header and one mode per line:
//!
//! ```text
//! {
//! "format": "mirror-mode-catalog",
//! "version": 1,
//! "source": "predict-cyl",
//! "modes": [
//! {"index":"cyl:0,1,1","f_hz":...,"omega_rad_s":...,"loss_angle":...,"mass_kg":...,"shape":{...}},
//! ...
//! ]
//! }
//! ```
//!
//! Shapes are polar samplings: node `(i, j)` sits at radius
//! `radius_m * i / (n_r - 1)` and angle `2π j / n_theta`, and `values` is
//! row-major in `i` (all angles of ring 0 first).

use std::path::Path;

use mirrormodes::{Mode, ModeIndex, ModeShape, PolarGrid};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const FORMAT: &str = "mirror-mode-catalog";
pub const VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ShapeRecord {
    radius_m: f64,
    n_r: usize,
    n_theta: usize,
    values: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModeRecord {
    index: String,
    /// Informational; `omega_rad_s` is authoritative.
    f_hz: f64,
    omega_rad_s: f64,
    loss_angle: f64,
    mass_kg: f64,
    shape: ShapeRecord,
}

#[derive(Debug, Deserialize)]
struct Header {
    format: String,
    version: u32,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    #[allow(dead_code)]
    format: String,
    #[allow(dead_code)]
    version: u32,
    source: String,
    modes: Vec<ModeRecord>,
}

/// Modes read back from a catalog, with the producing command.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    pub source: String,
    pub modes: Vec<Mode>,
}

fn record(mode: &Mode) -> ModeRecord {
    let grid = match &mode.shape {
        ModeShape::Sampled(g) => g.clone(),
        other => other.to_grid(65, 96),
    };
    ModeRecord {
        index: mode.index.to_string(),
        f_hz: mode.frequency_hz(),
        omega_rad_s: mode.omega(),
        loss_angle: mode.loss_angle(),
        mass_kg: mode.mass(),
        shape: ShapeRecord {
            radius_m: grid.radius,
            n_r: grid.n_r,
            n_theta: grid.n_theta,
            values: grid.values,
        },
    }
}

/// Serializes modes; analytic shapes are sampled on a 65 x 96 grid, so
/// callers wanting another sampling pass [`Mode::sampled`] modes.
pub fn to_string(modes: &[Mode], source: &str) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    out.push_str(&format!("\"format\": \"{FORMAT}\",\n"));
    out.push_str(&format!("\"version\": {VERSION},\n"));
    out.push_str(&format!("\"source\": {},\n", serde_json::to_string(source).expect("string")));
    out.push_str("\"modes\": [\n");
    for (k, mode) in modes.iter().enumerate() {
        out.push_str(&serde_json::to_string(&record(mode)).expect("finite floats serialize"));
        out.push_str(if k + 1 < modes.len() { ",\n" } else { "\n" });
    }
    out.push_str("]\n}\n");
    out
}

pub fn from_str(text: &str, path: &Path) -> CliResult<Catalog> {
    let json_err = |e: serde_json::Error| CliError::parse(path, e.line(), e.to_string());
    let header: Header = serde_json::from_str(text).map_err(json_err)?;
    let line_of = |key: &str| {
        text.lines()
            .position(|l| l.contains(&format!("\"{key}\"")))
            .map_or(1, |i| i + 1)
    };
    if header.format != FORMAT {
        return Err(CliError::parse(
            path,
            line_of("format"),
            format!("format `{}` is not `{FORMAT}`", header.format),
        ));
    }
    if header.version != VERSION {
        return Err(CliError::parse(
            path,
            line_of("version"),
            format!("catalog version {} is not supported (expected {VERSION})", header.version),
        ));
    }
    let doc: Document = serde_json::from_str(text).map_err(json_err)?;
    let first_mode_line = line_of("modes") + 1;
    let modes = doc
        .modes
        .into_iter()
        .enumerate()
        .map(|(k, r)| {
            let line = first_mode_line + k;
            let bad = |e: mirrormodes::Error| CliError::parse(path, line, format!("mode {}: {e}", r.index));
            let index = ModeIndex::parse(&r.index).map_err(bad)?;
            let grid = PolarGrid::new(r.shape.radius_m, r.shape.n_r, r.shape.n_theta, r.shape.values.clone())
                .map_err(bad)?;
            Mode::new(index, r.omega_rad_s, r.loss_angle, r.mass_kg, ModeShape::Sampled(grid)).map_err(bad)
        })
        .collect::<CliResult<Vec<Mode>>>()?;
    Ok(Catalog {
        source: doc.source,
        modes,
    })
}

pub fn write(path: &Path, modes: &[Mode], source: &str) -> CliResult<()> {
    std::fs::write(path, to_string(modes, source)).map_err(|e| CliError::io(path, e))
}

pub fn read(path: &Path) -> CliResult<Catalog> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    from_str(&text, path)
}
