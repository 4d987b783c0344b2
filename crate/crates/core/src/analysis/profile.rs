//! Radial profiles of scan maps and acoustic-waist fits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::laguerre;
use crate::scan::ScanMap;

/// Default lower bound on `|cos lθ|` for a sample to enter a profile.
pub const DEFAULT_NODE_GUARD: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    /// Mean radius of the samples in the bin (m).
    pub r: f64,
    pub value: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RadialProfile {
    pub points: Vec<ProfilePoint>,
    pub warnings: Vec<String>,
}

/// Signed map values: amplitude times the cosine of the phase relative to
/// the phase at the strongest sample.
pub fn signed_values(map: &ScanMap) -> Vec<f64> {
    let reference = map
        .points
        .iter()
        .max_by(|a, b| a.amplitude.total_cmp(&b.amplitude))
        .map(|p| p.phase)
        .unwrap_or(0.0);
    map.points
        .iter()
        .map(|p| p.amplitude * (p.phase - reference).cos())
        .collect()
}

/// Angular average of `value(θ) / cos(lθ)` in radial bins of width
/// `bin_width` (default: the line spacing), keeping only samples with
/// `|cos lθ| ≥ node_guard`.
pub fn radial_profile(map: &ScanMap, l: u32, node_guard: f64, bin_width: Option<f64>) -> Result<RadialProfile> {
    let width = bin_width.unwrap_or(2.0 * map.radius / map.lines as f64);
    if !(width > 0.0) {
        return Err(Error::InvalidConfig(format!("bin width {width} must be positive")));
    }
    let bins = (map.radius / width).ceil() as usize;
    let mut sum = vec![0.0; bins];
    let mut rsum = vec![0.0; bins];
    let mut count = vec![0usize; bins];
    let mut seen = vec![false; bins];
    for (p, v) in map.points.iter().zip(signed_values(map)) {
        let r = p.radius();
        let b = ((r / width) as usize).min(bins - 1);
        seen[b] = true;
        let c = (l as f64 * p.angle()).cos();
        if c.abs() >= node_guard {
            sum[b] += v / c;
            rsum[b] += r;
            count[b] += 1;
        }
    }
    let mut profile = RadialProfile::default();
    for b in 0..bins {
        if count[b] > 0 {
            profile.points.push(ProfilePoint {
                r: rsum[b] / count[b] as f64,
                value: sum[b] / count[b] as f64,
                samples: count[b],
            });
        } else if seen[b] {
            profile.warnings.push(format!(
                "bin [{:.3e}, {:.3e}] m dropped: no sample with |cos lθ| >= {node_guard}",
                b as f64 * width,
                (b + 1) as f64 * width
            ));
        }
    }
    if profile.points.is_empty() {
        return Err(Error::Domain(format!(
            "every radial bin was dropped by the node guard {node_guard}"
        )));
    }
    Ok(profile)
}

/// Radial factor `exp(-r²/w²) (r/w)^l L_p^l(2r²/w²)` of a gaussian mode.
pub fn gaussian_radial(l: u32, p: u32, w: f64, r: f64) -> f64 {
    let s = r / w;
    (-s * s).exp() * s.powi(l as i32) * laguerre(p, l, 2.0 * s * s)
}

/// Best amplitude and the sum of squared residuals for waist `w`.
fn amplitude_fit(profile: &RadialProfile, l: u32, p: u32, w: f64) -> (f64, f64) {
    let (mut gg, mut gy) = (0.0, 0.0);
    for pt in &profile.points {
        let g = gaussian_radial(l, p, w, pt.r);
        gg += g * g;
        gy += g * pt.value;
    }
    let a = if gg > 0.0 { gy / gg } else { 0.0 };
    let ss = profile
        .points
        .iter()
        .map(|pt| (pt.value - a * gaussian_radial(l, p, w, pt.r)).powi(2))
        .sum();
    (a, ss)
}

/// RMS residual of the `(l, p)` radial form with waist `w` (amplitude
/// fitted), relative to the largest profile magnitude.
pub fn profile_residual(profile: &RadialProfile, l: u32, p: u32, w: f64) -> f64 {
    let (_, ss) = amplitude_fit(profile, l, p, w);
    let peak = profile.points.iter().fold(0.0f64, |m, pt| m.max(pt.value.abs()));
    (ss / profile.points.len() as f64).sqrt() / peak
}

/// Least-squares acoustic waist of a radial profile, with the amplitude as
/// the only other free parameter.
pub fn fit_waist(profile: &RadialProfile, l: u32, p: u32) -> Result<f64> {
    if profile.points.len() < 3 {
        return Err(Error::FitFailure("a waist fit needs at least three profile points".into()));
    }
    let r_max = profile.points.iter().fold(0.0f64, |m, pt| m.max(pt.r));
    if !(r_max > 0.0) || profile.points.iter().all(|pt| pt.value == 0.0) {
        return Err(Error::FitFailure("profile carries no signal".into()));
    }
    let cost = |lnw: f64| amplitude_fit(profile, l, p, lnw.exp()).1;
    const SCAN: usize = 400;
    let lo = (r_max / 100.0).ln();
    let hi = (r_max * 10.0).ln();
    let step = (hi - lo) / SCAN as f64;
    let best = (0..=SCAN)
        .map(|k| (k, cost(lo + step * k as f64)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(k, _)| k)
        .unwrap_or(0);
    if best == 0 || best == SCAN {
        return Err(Error::FitFailure(format!(
            "waist fit ran to the edge of the search range [{:.3e}, {:.3e}] m",
            lo.exp(),
            hi.exp()
        )));
    }
    // golden-section refinement inside the bracketing cells
    let (mut a, mut b) = (lo + step * (best - 1) as f64, lo + step * (best + 1) as f64);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (cost(c), cost(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-13 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = cost(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = cost(d);
        }
    }
    Ok((0.5 * (a + b)).exp())
}

/// Dominant azimuthal order of a scan map, up to `max_order`.
///
/// The map is cut into rings one line spacing wide. In each ring every order
/// is scored by the power its `cos`/`sin` pair captures in a least-squares
/// sense, so radial sign changes do not cancel; ties go to the lower order.
pub fn classify_map_order(map: &ScanMap, max_order: u32) -> Result<u32> {
    let values = signed_values(map);
    if values.iter().all(|v| *v == 0.0) {
        return Err(Error::Classification("scan map is empty".into()));
    }
    let width = 2.0 * map.radius / map.lines.max(1) as f64;
    let rings = ((map.radius / width).ceil() as usize).max(1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); rings];
    for (k, pt) in map.points.iter().enumerate() {
        members[((pt.radius() / width) as usize).min(rings - 1)].push(k);
    }
    let mut scores = vec![0.0; max_order as usize + 1];
    for ring in members.iter().filter(|m| !m.is_empty()) {
        for (l, score) in scores.iter_mut().enumerate() {
            let (mut c, mut s, mut cc, mut ss) = (0.0, 0.0, 0.0, 0.0);
            for &k in ring {
                let t = l as f64 * map.points[k].angle();
                c += values[k] * t.cos();
                s += values[k] * t.sin();
                cc += t.cos().powi(2);
                ss += t.sin().powi(2);
            }
            if cc > 1e-12 * ring.len() as f64 {
                *score += c * c / cc;
            }
            if ss > 1e-12 * ring.len() as f64 {
                *score += s * s / ss;
            }
        }
    }
    let mut best = 0;
    for (l, score) in scores.iter().enumerate() {
        if *score > scores[best] * (1.0 + 1e-9) {
            best = l;
        }
    }
    Ok(best as u32)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::model::ModeIndex;
    use crate::scan::ScanPoint;

    fn synthetic_map(l: u32, p: u32, w: f64, radius: f64, n: usize) -> ScanMap {
        let mut points = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let x = radius * (2.0 * (i as f64 + 0.5) / n as f64 - 1.0);
                let y = radius * (2.0 * (j as f64 + 0.5) / n as f64 - 1.0);
                let r = x.hypot(y);
                if r > radius {
                    continue;
                }
                let v = gaussian_radial(l, p, w, r) * (l as f64 * y.atan2(x)).cos();
                points.push(ScanPoint {
                    x,
                    y,
                    amplitude: v.abs(),
                    phase: if v >= 0.0 { PI / 2.0 } else { -PI / 2.0 },
                });
            }
        }
        ScanMap {
            points,
            radius,
            mode: ModeIndex::parse("gauss:4,0,0").unwrap(),
            lines: n,
            serpentine: false,
            blur: 0.0,
            blur_warning: false,
            warnings: Vec::new(),
        }
    }

    #[test]
    fn axisymmetric_profile_is_gaussian() {
        let map = synthetic_map(0, 0, 2e-3, 6e-3, 100);
        let prof = radial_profile(&map, 0, DEFAULT_NODE_GUARD, None).unwrap();
        for pt in &prof.points {
            let expect = gaussian_radial(0, 0, 2e-3, pt.r);
            assert!((pt.value - expect).abs() < 5e-3, "{} {} {}", pt.r, pt.value, expect);
        }
        let w = fit_waist(&prof, 0, 0).unwrap();
        assert!((w / 2e-3 - 1.0).abs() < 5e-3, "{w}");
    }

    #[test]
    fn node_guard_of_one_drops_every_bin() {
        let map = synthetic_map(3, 1, 2e-3, 6e-3, 40);
        assert!(radial_profile(&map, 3, 1.0 + 1e-9, None).is_err());
    }

    #[test]
    fn map_order_is_recovered() {
        for l in 0..5 {
            let map = synthetic_map(l, 0, 2e-3, 6e-3, 60);
            assert_eq!(classify_map_order(&map, 8).unwrap(), l);
        }
    }

    #[test]
    fn radial_nodes_do_not_hide_order_zero() {
        // w chosen so the (0, 2) profile has nearly zero mean over the face
        for w in [2.5e-3, 3.0e-3, 3.5e-3] {
            let map = synthetic_map(0, 2, w, 6e-3, 40);
            assert_eq!(classify_map_order(&map, 8).unwrap(), 0, "w = {w}");
        }
        let map = synthetic_map(2, 2, 3e-3, 6e-3, 40);
        assert_eq!(classify_map_order(&map, 8).unwrap(), 2);
    }

    #[test]
    fn waist_is_scale_invariant() {
        let map = synthetic_map(0, 0, 2.3e-3, 6e-3, 80);
        let mut prof = radial_profile(&map, 0, DEFAULT_NODE_GUARD, None).unwrap();
        let w1 = fit_waist(&prof, 0, 0).unwrap();
        for pt in &mut prof.points {
            pt.value *= -4.2e-15;
        }
        let w2 = fit_waist(&prof, 0, 0).unwrap();
        assert!((w1 / w2 - 1.0).abs() < 1e-6, "{w1} {w2}");
    }
}
