//! Delimited-text exports of spectra and scan maps.
//!
//! Each file opens with a block of `# key = value` lines followed by a CSV
//! table. Spectra carry the columns `f_Hz,S_m2_per_Hz,asd_m_per_rtHz`; maps
//! carry `x_m,y_m,amp_m,phase_rad` in acquisition order.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use mirrormodes::noise::{FrequencyGrid, Spectrum, SpectrumMeta};
use mirrormodes::scan::{ScanMap, ScanPoint};
use mirrormodes::ModeIndex;

use crate::error::{CliError, CliResult};

pub const SPECTRUM_FORMAT: &str = "mirror-spectrum";
pub const MAP_FORMAT: &str = "mirror-scan-map";
pub const VERSION: u32 = 1;

/// Header key/value pairs, in file order, with their line numbers.
#[derive(Debug, Default)]
struct HeaderBlock {
    entries: Vec<(String, String, usize)>,
}

impl HeaderBlock {
    fn parse(text: &str) -> Self {
        let entries = text
            .lines()
            .enumerate()
            .take_while(|(_, l)| l.starts_with('#'))
            .filter_map(|(i, l)| {
                let (k, v) = l.trim_start_matches('#').split_once('=')?;
                Some((k.trim().to_string(), v.trim().to_string(), i + 1))
            })
            .collect();
        Self { entries }
    }

    fn get(&self, key: &str) -> Option<(&str, usize)> {
        self.entries
            .iter()
            .find(|(k, _, _)| k == key)
            .map(|(_, v, line)| (v.as_str(), *line))
    }

    fn all(&self, key: &str) -> Vec<String> {
        self.entries
            .iter()
            .filter(|(k, _, _)| k == key)
            .map(|(_, v, _)| v.clone())
            .collect()
    }

    fn require<T: std::str::FromStr>(&self, path: &Path, key: &str) -> CliResult<T> {
        let (v, line) = self
            .get(key)
            .ok_or_else(|| CliError::parse(path, 1, format!("header lacks `{key}`")))?;
        v.parse()
            .map_err(|_| CliError::parse(path, line, format!("cannot parse `{key}` value `{v}`")))
    }

    fn check_format(&self, path: &Path, format: &str) -> CliResult<()> {
        let found: String = self.require(path, "format")?;
        let (_, line) = self.get("format").expect("present");
        if found != format {
            return Err(CliError::parse(path, line, format!("format `{found}` is not `{format}`")));
        }
        let version: u32 = self.require(path, "version")?;
        if version != VERSION {
            let (_, line) = self.get("version").expect("present");
            return Err(CliError::parse(
                path,
                line,
                format!("version {version} is not supported (expected {VERSION})"),
            ));
        }
        Ok(())
    }
}

fn header_lines(pairs: &[(&str, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("# {k} = {v}\n")).collect()
}

fn csv_rows<const N: usize>(header: String, columns: [&str; N], rows: impl Iterator<Item = [f64; N]>) -> Vec<u8> {
    let mut buf = header.into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(columns).expect("in-memory write");
        for row in rows {
            w.write_record(row.iter().map(|v| v.to_string())).expect("in-memory write");
        }
        w.flush().expect("in-memory flush");
    }
    buf
}

fn read_rows<const N: usize>(text: &str, path: &Path, columns: [&str; N]) -> CliResult<Vec<[f64; N]>> {
    let skipped = text.lines().take_while(|l| l.starts_with('#')).count();
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| CliError::parse(path, skipped + 1, e.to_string()))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != columns {
        return Err(CliError::parse(
            path,
            skipped + 1,
            format!("columns are `{}`, expected `{}`", headers.iter().collect::<Vec<_>>().join(","), columns.join(",")),
        ));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            CliError::parse(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let mut row = [0.0; N];
        for (k, slot) in row.iter_mut().enumerate() {
            let field = record.get(k).unwrap_or("");
            *slot = field
                .trim()
                .parse()
                .map_err(|_| CliError::parse(path, line, format!("`{field}` is not a number")))?;
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn spectrum_to_bytes(spec: &Spectrum, temperature: f64) -> Vec<u8> {
    let mut pairs = vec![
        ("format", SPECTRUM_FORMAT.to_string()),
        ("version", VERSION.to_string()),
        ("temperature_k", temperature.to_string()),
        ("start_hz", spec.grid().start_hz().to_string()),
        ("step_hz", spec.grid().step_hz().to_string()),
        ("points", spec.grid().len().to_string()),
    ];
    if let Some(rbw) = spec.meta.rbw_hz {
        pairs.push(("rbw_hz", rbw.to_string()));
    }
    for label in &spec.meta.labels {
        pairs.push(("label", label.clone()));
    }
    let freqs = spec.frequencies();
    let rows = freqs
        .into_iter()
        .zip(spec.psd())
        .map(|(f, &s)| [f, s, s.sqrt()]);
    csv_rows(header_lines(&pairs), ["f_Hz", "S_m2_per_Hz", "asd_m_per_rtHz"], rows)
}

pub fn write_spectrum(path: &Path, spec: &Spectrum, temperature: f64) -> CliResult<()> {
    std::fs::write(path, spectrum_to_bytes(spec, temperature)).map_err(|e| CliError::io(path, e))
}

/// A spectrum file: the spectrum and the bath temperature it was made at.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumFile {
    pub spectrum: Spectrum,
    pub temperature: f64,
}

pub fn parse_spectrum(text: &str, path: &Path) -> CliResult<SpectrumFile> {
    let header = HeaderBlock::parse(text);
    header.check_format(path, SPECTRUM_FORMAT)?;
    let temperature: f64 = header.require(path, "temperature_k")?;
    let start: f64 = header.require(path, "start_hz")?;
    let step: f64 = header.require(path, "step_hz")?;
    let points: usize = header.require(path, "points")?;
    let rows = read_rows(text, path, ["f_Hz", "S_m2_per_Hz", "asd_m_per_rtHz"])?;
    if rows.len() != points {
        return Err(CliError::parse(
            path,
            text.lines().count(),
            format!("{} rows for a {points}-point grid", rows.len()),
        ));
    }
    let grid = FrequencyGrid::with_step(start, step, points)
        .map_err(|e| CliError::parse(path, 1, format!("frequency grid: {e}")))?;
    let meta = SpectrumMeta {
        rbw_hz: header.get("rbw_hz").map(|_| header.require(path, "rbw_hz")).transpose()?,
        labels: header.all("label"),
    };
    let psd = rows.iter().map(|r| r[1]).collect();
    let spectrum = Spectrum::new(grid, psd, meta).map_err(|e| CliError::parse(path, 1, e.to_string()))?;
    Ok(SpectrumFile { spectrum, temperature })
}

pub fn read_spectrum(path: &Path) -> CliResult<SpectrumFile> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_spectrum(&text, path)
}

pub fn map_to_bytes(map: &ScanMap) -> Vec<u8> {
    let mut pairs = vec![
        ("format", MAP_FORMAT.to_string()),
        ("version", VERSION.to_string()),
        ("mode", map.mode.to_string()),
        ("radius_m", map.radius.to_string()),
        ("lines", map.lines.to_string()),
        ("serpentine", map.serpentine.to_string()),
        ("blur_m", map.blur.to_string()),
        ("blur_warning", map.blur_warning.to_string()),
    ];
    for w in &map.warnings {
        pairs.push(("warning", w.clone()));
    }
    let rows = map.points.iter().map(|p| [p.x, p.y, p.amplitude, p.phase]);
    csv_rows(header_lines(&pairs), ["x_m", "y_m", "amp_m", "phase_rad"], rows)
}

pub fn write_map(path: &Path, map: &ScanMap) -> CliResult<()> {
    std::fs::write(path, map_to_bytes(map)).map_err(|e| CliError::io(path, e))
}

pub fn parse_map(text: &str, path: &Path) -> CliResult<ScanMap> {
    let header = HeaderBlock::parse(text);
    header.check_format(path, MAP_FORMAT)?;
    let mode_text: String = header.require(path, "mode")?;
    let mode = ModeIndex::parse(&mode_text).map_err(|e| {
        let (_, line) = header.get("mode").expect("present");
        CliError::parse(path, line, e.to_string())
    })?;
    let rows = read_rows(text, path, ["x_m", "y_m", "amp_m", "phase_rad"])?;
    Ok(ScanMap {
        points: rows
            .iter()
            .map(|r| ScanPoint {
                x: r[0],
                y: r[1],
                amplitude: r[2],
                phase: r[3],
            })
            .collect(),
        radius: header.require(path, "radius_m")?,
        mode,
        lines: header.require(path, "lines")?,
        serpentine: header.require(path, "serpentine")?,
        blur: header.require(path, "blur_m")?,
        blur_warning: header.require(path, "blur_warning")?,
        warnings: header.all("warning"),
    })
}

pub fn read_map(path: &Path) -> CliResult<ScanMap> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_map(&text, path)
}

/// Writes `key = value` report lines followed by a CSV table.
pub fn write_table(
    path: &Path,
    meta: &BTreeMap<String, String>,
    columns: &[&str],
    rows: &[Vec<String>],
) -> CliResult<()> {
    let mut buf: Vec<u8> = meta.iter().map(|(k, v)| format!("# {k} = {v}\n")).collect::<String>().into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(columns).expect("in-memory write");
        for row in rows {
            w.write_record(row).expect("in-memory write");
        }
        w.flush().expect("in-memory flush");
    }
    let mut file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    file.write_all(&buf).map_err(|e| CliError::io(path, e))
}
