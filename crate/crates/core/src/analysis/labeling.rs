use serde::{Deserialize, Serialize};

use super::lorentz::PeakFit;
use crate::error::{Error, Result};
use crate::model::{Mode, ModeIndex};

/// What the matcher needs to know about an observed resonance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasuredPeak {
    pub f_hz: f64,
    /// Azimuthal order seen on a scan map of the resonance, if any.
    pub circumferential_order: Option<u32>,
}

impl MeasuredPeak {
    pub fn new(f_hz: f64) -> Self {
        Self {
            f_hz,
            circumferential_order: None,
        }
    }

    pub fn with_order(f_hz: f64, n: u32) -> Self {
        Self {
            f_hz,
            circumferential_order: Some(n),
        }
    }
}

impl From<&PeakFit> for MeasuredPeak {
    fn from(fit: &PeakFit) -> Self {
        Self {
            f_hz: fit.f_hz,
            circumferential_order: fit.circumferential_order,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub index: ModeIndex,
    pub predicted_hz: f64,
    pub measured_hz: f64,
    /// `|f_measured - f_predicted| / f_predicted`.
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ModeAssignment {
    /// Matched pairs ordered by predicted frequency.
    pub pairs: Vec<Assignment>,
    pub unmatched_predicted: Vec<(ModeIndex, f64)>,
    pub unmatched_measured: Vec<f64>,
}

/// One-to-one matching of measured peaks to predicted modes.
///
/// Candidate pairs within `tol_rel` are accepted greedily in order of
/// increasing relative error. A measured peak that carries a circumferential
/// order only pairs with modes of that order. Ties are broken on the
/// frequencies and indices themselves, so the result does not depend on the
/// order of either input list.
pub fn label_modes(measured: &[MeasuredPeak], predicted: &[Mode], tol_rel: f64) -> Result<ModeAssignment> {
    if !(tol_rel > 0.0 && tol_rel <= 0.1) {
        return Err(Error::InvalidConfig(format!("matching tolerance {tol_rel} outside (0, 0.1]")));
    }
    let mut candidates = Vec::new();
    for (i, peak) in measured.iter().enumerate() {
        for (j, mode) in predicted.iter().enumerate() {
            if let Some(n) = peak.circumferential_order {
                if mode.index.azimuthal_order() != n {
                    continue;
                }
            }
            let fp = mode.frequency_hz();
            let err = (peak.f_hz - fp).abs() / fp;
            if err <= tol_rel {
                candidates.push((err, fp, mode.index, peak.f_hz, i, j));
            }
        }
    }
    candidates.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then(a.1.total_cmp(&b.1))
            .then(a.2.cmp(&b.2))
            .then(a.3.total_cmp(&b.3))
    });
    let mut used_measured = vec![false; measured.len()];
    let mut used_predicted = vec![false; predicted.len()];
    let mut pairs = Vec::new();
    for (err, fp, index, fm, i, j) in candidates {
        if used_measured[i] || used_predicted[j] {
            continue;
        }
        used_measured[i] = true;
        used_predicted[j] = true;
        pairs.push(Assignment {
            index,
            predicted_hz: fp,
            measured_hz: fm,
            relative_error: err,
        });
    }
    pairs.sort_by(|a, b| a.predicted_hz.total_cmp(&b.predicted_hz).then(a.index.cmp(&b.index)));
    let mut unmatched_predicted: Vec<(ModeIndex, f64)> = predicted
        .iter()
        .zip(&used_predicted)
        .filter(|(_, used)| !**used)
        .map(|(m, _)| (m.index, m.frequency_hz()))
        .collect();
    unmatched_predicted.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let mut unmatched_measured: Vec<f64> = measured
        .iter()
        .zip(&used_measured)
        .filter(|(_, used)| !**used)
        .map(|(p, _)| p.f_hz)
        .collect();
    unmatched_measured.sort_by(f64::total_cmp);
    Ok(ModeAssignment {
        pairs,
        unmatched_predicted,
        unmatched_measured,
    })
}
