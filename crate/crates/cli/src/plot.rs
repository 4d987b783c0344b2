//! Self-contained SVG plots.
//!
//! Spectra become log-log line plots of the amplitude spectral density
//! (m/√Hz against Hz). Maps become polar heat maps of the signed response,
//! red for positive and blue for negative lobes, with the mirror edge drawn
//! as a solid circle.

use std::fmt::Write as _;
use std::path::Path;

use mirrormodes::analysis::signed_values;
use mirrormodes::noise::Spectrum;
use mirrormodes::scan::ScanMap;

use crate::error::{CliError, CliResult};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 520.0;
const MARGIN_L: f64 = 90.0;
const MARGIN_R: f64 = 30.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 60.0;

fn svg_open(out: &mut String, w: f64, h: f64) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn decade_label(e: i32) -> String {
    format!("1e{e}")
}

/// Log-log plot of `sqrt(S)` against frequency.
pub fn spectrum_svg(spec: &Spectrum, title: &str) -> CliResult<String> {
    let freqs = spec.frequencies();
    let asd = spec.asd();
    let pts: Vec<(f64, f64)> = freqs
        .iter()
        .zip(&asd)
        .filter(|(f, a)| **f > 0.0 && **a > 0.0)
        .map(|(f, a)| (f.log10(), a.log10()))
        .collect();
    if pts.is_empty() {
        return Err(CliError::Usage("cannot plot an empty spectrum (no positive samples)".into()));
    }
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x1 - x0 < 1e-9 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    y0 = y0.floor();
    y1 = y1.ceil().max(y0 + 1.0);
    let pw = WIDTH - MARGIN_L - MARGIN_R;
    let ph = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| MARGIN_T + (y1 - y) / (y1 - y0) * ph;

    let mut out = String::new();
    svg_open(&mut out, WIDTH, HEIGHT);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for e in (x0.ceil() as i32)..=(x1.floor() as i32) {
        let x = sx(e as f64);
        let _ = writeln!(
            out,
            r##"<line x1="{x:.2}" y1="{MARGIN_T}" x2="{x:.2}" y2="{:.2}" stroke="#ccc"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            MARGIN_T + ph,
            MARGIN_T + ph + 18.0,
            decade_label(e)
        );
    }
    for e in (y0 as i32)..=(y1 as i32) {
        let y = sy(e as f64);
        let _ = writeln!(
            out,
            r##"<line x1="{MARGIN_L}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ccc"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            MARGIN_L + pw,
            MARGIN_L - 6.0,
            y + 4.0,
            decade_label(e)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">frequency (Hz)</text>"#,
        MARGIN_L + pw / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        out,
        r#"<text x="20" y="{}" text-anchor="middle" transform="rotate(-90 20 {})">displacement (m/√Hz)</text>"#,
        MARGIN_T + ph / 2.0,
        MARGIN_T + ph / 2.0
    );

    // keep the extremes of every pixel column so narrow peaks survive
    let columns = pw.ceil() as usize;
    let mut path = String::new();
    let mut k = 0;
    for c in 0..columns {
        let edge = x0 + (c + 1) as f64 / columns as f64 * (x1 - x0);
        let start = k;
        while k < pts.len() && (pts[k].0 <= edge || c + 1 == columns) {
            k += 1;
        }
        if k == start {
            continue;
        }
        let chunk = &pts[start..k];
        let lo = chunk.iter().copied().fold(chunk[0], |a, p| if p.1 < a.1 { p } else { a });
        let hi = chunk.iter().copied().fold(chunk[0], |a, p| if p.1 > a.1 { p } else { a });
        let pair = if lo.0 <= hi.0 { [lo, hi] } else { [hi, lo] };
        for (x, y) in pair {
            let cmd = if path.is_empty() { 'M' } else { 'L' };
            let _ = write!(path, "{cmd}{:.2},{:.2} ", sx(x), sy(y));
        }
    }
    let _ = writeln!(
        out,
        r##"<path d="{}" fill="none" stroke="#1f4e9c" stroke-width="1"/>"##,
        path.trim_end()
    );
    out.push_str("</svg>\n");
    Ok(out)
}

fn diverging(v: f64) -> String {
    let t = v.clamp(-1.0, 1.0);
    let (r, g, b) = if t >= 0.0 {
        (255.0, 255.0 * (1.0 - t), 255.0 * (1.0 - t))
    } else {
        (255.0 * (1.0 + t), 255.0 * (1.0 + t), 255.0)
    };
    format!("#{:02x}{:02x}{:02x}", r.round() as u8, g.round() as u8, b.round() as u8)
}

/// Polar heat map of the signed scan response with the mirror edge.
pub fn map_svg(map: &ScanMap, title: &str) -> CliResult<String> {
    if map.points.is_empty() {
        return Err(CliError::Usage("cannot plot an empty scan map".into()));
    }
    let values = signed_values(map);
    let peak = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let size = 600.0;
    let pad = 50.0;
    let scale = (size / 2.0 - pad) / map.radius;
    let c = size / 2.0;
    let pitch = 2.0 * map.radius / (map.lines.max(2) - 1) as f64;
    let along = map
        .points
        .windows(2)
        .map(|w| (w[1].x - w[0].x).hypot(w[1].y - w[0].y))
        .filter(|d| *d > 0.0)
        .fold(f64::INFINITY, f64::min);
    let cell_w = (if along.is_finite() { along } else { pitch }) * scale;
    let cell_h = pitch * scale;

    let mut out = String::new();
    svg_open(&mut out, size, size + 30.0);
    let _ = writeln!(
        out,
        r#"<text x="{c}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        escape(title)
    );
    let _ = writeln!(out, r#"<g transform="translate(0 20)">"#);
    for (p, v) in map.points.iter().zip(&values) {
        let norm = if peak > 0.0 { v / peak } else { 0.0 };
        let _ = writeln!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
            c + p.x * scale - cell_w / 2.0,
            c - p.y * scale - cell_h / 2.0,
            cell_w,
            cell_h,
            diverging(norm)
        );
    }
    let r = map.radius * scale;
    let _ = writeln!(out, r#"<circle cx="{c}" cy="{c}" r="{r:.2}" fill="none" stroke="black" stroke-width="2"/>"#);
    for frac in [0.25, 0.5, 0.75] {
        let _ = writeln!(
            out,
            r##"<circle cx="{c}" cy="{c}" r="{:.2}" fill="none" stroke="#888" stroke-dasharray="3 3"/>"##,
            r * frac
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{c}" y="{:.2}" text-anchor="middle">edge radius {:.2} mm</text>"#,
        c + r + 20.0,
        map.radius * 1e3
    );
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}

/// Renders first, so nothing is written when the data cannot be plotted.
pub fn write_svg(path: &Path, svg: CliResult<String>) -> CliResult<()> {
    let svg = svg?;
    std::fs::write(path, svg).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use mirrormodes::noise::{FrequencyGrid, SpectrumMeta};
    use mirrormodes::scan::ScanPoint;
    use mirrormodes::ModeIndex;

    use super::*;

    #[test]
    fn spectrum_plot_is_log_log() {
        let grid = FrequencyGrid::linspace(10e3, 500e3, 2001).unwrap();
        let psd = grid.frequencies().iter().map(|f| 1e-30 * (1e5 / f).powi(2)).collect();
        let spec = Spectrum::new(grid, psd, SpectrumMeta::default()).unwrap();
        let svg = spectrum_svg(&spec, "test").unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("frequency (Hz)"));
        assert!(svg.contains("m/√Hz"));
        assert!(svg.contains(">1e5<"));
        assert!(svg.contains(">1e-15<"));
    }

    #[test]
    fn empty_spectrum_writes_nothing() {
        let grid = FrequencyGrid::linspace(10e3, 20e3, 11).unwrap();
        let spec = Spectrum::new(grid, vec![0.0; 11], SpectrumMeta::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.svg");
        assert!(write_svg(&path, spectrum_svg(&spec, "empty")).is_err());
        assert!(!path.exists());
    }

    #[test]
    fn map_plot_draws_the_mirror_edge() {
        let map = ScanMap {
            points: (0..25)
                .map(|k| ScanPoint {
                    x: (k % 5) as f64 * 1e-3 - 2e-3,
                    y: (k / 5) as f64 * 1e-3 - 2e-3,
                    amplitude: 1e-15,
                    phase: if k % 2 == 0 { 0.0 } else { std::f64::consts::PI },
                })
                .collect(),
            radius: 2e-3,
            mode: ModeIndex::parse("gauss:1,0,0").unwrap(),
            lines: 5,
            serpentine: false,
            blur: 0.0,
            blur_warning: false,
            warnings: Vec::new(),
        };
        let svg = map_svg(&map, "map").unwrap();
        assert!(svg.contains(r#"stroke="black" stroke-width="2""#));
        assert!(svg.contains("#ff0000") && svg.contains("#0000ff"));
    }
}
