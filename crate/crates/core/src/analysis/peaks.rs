use serde::{Deserialize, Serialize};

use crate::noise::Spectrum;

/// Local maxima closer than this many bins are merged.
pub const MERGE_BINS: usize = 3;

/// A maximum must exceed the higher of its two key cols by this factor.
pub const MIN_PROMINENCE: f64 = 2.0;

/// Index range around one candidate peak, inclusive at both ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeakWindow {
    pub peak: usize,
    pub lo: usize,
    pub hi: usize,
}

/// Higher of the lowest points separating `i` from taller samples on
/// either side (or from the spectrum edge).
fn key_col(psd: &[f64], i: usize) -> f64 {
    let side = |range: &mut dyn Iterator<Item = usize>| {
        let mut low = psd[i];
        for j in range {
            if psd[j] > psd[i] {
                break;
            }
            low = low.min(psd[j]);
        }
        low
    };
    side(&mut (0..i).rev()).max(side(&mut (i + 1..psd.len())))
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Rough full width at half maximum (bins) of the peak at `i`, measured
/// above `floor`.
fn width_bins(psd: &[f64], i: usize, floor: f64) -> f64 {
    let half = floor + 0.5 * (psd[i] - floor);
    let crossing = |step: isize| -> Option<f64> {
        let mut j = i as isize;
        loop {
            let next = j + step;
            if next < 0 || next as usize >= psd.len() {
                return None;
            }
            let (a, b) = (psd[j as usize], psd[next as usize]);
            if b <= half {
                return Some((j - i as isize).unsigned_abs() as f64 + (a - half) / (a - b));
            }
            if b > a {
                return None;
            }
            j = next;
        }
    };
    match (crossing(-1), crossing(1)) {
        (Some(l), Some(r)) => l + r,
        (Some(x), None) | (None, Some(x)) => 2.0 * x,
        (None, None) => 2.0,
    }
}

/// Candidate peak windows: local maxima above `threshold` times the median
/// of the spectrum and [`MIN_PROMINENCE`] times their key col, merged
/// within [`MERGE_BINS`]. Each window spans ten
/// estimated widths on either side, clipped halfway to its neighbours.
pub fn detect_peaks(spec: &Spectrum, threshold: f64) -> Vec<PeakWindow> {
    let psd = spec.psd();
    let n = psd.len();
    if n < 3 {
        return Vec::new();
    }
    let floor = median(psd);
    let level = threshold * floor;
    let mut maxima: Vec<usize> = (1..n - 1)
        .filter(|&i| psd[i] > level && psd[i] >= psd[i - 1] && psd[i] > psd[i + 1])
        .filter(|&i| psd[i] > MIN_PROMINENCE * key_col(psd, i))
        .collect();
    // merge neighbours, keeping the higher one
    let mut merged: Vec<usize> = Vec::new();
    maxima.sort_unstable();
    for i in maxima {
        match merged.last_mut() {
            Some(last) if i - *last <= MERGE_BINS => {
                if psd[i] > psd[*last] {
                    *last = i;
                }
            }
            _ => merged.push(i),
        }
    }
    let mut windows = Vec::with_capacity(merged.len());
    for (k, &i) in merged.iter().enumerate() {
        let reach = (10.0 * width_bins(psd, i, floor)).ceil().max(5.0) as usize;
        let mut lo = i.saturating_sub(reach);
        let mut hi = (i + reach).min(n - 1);
        if k > 0 {
            lo = lo.max((merged[k - 1] + i).div_ceil(2));
        }
        if k + 1 < merged.len() {
            hi = hi.min((i + merged[k + 1]) / 2);
        }
        windows.push(PeakWindow { peak: i, lo, hi });
    }
    windows
}
