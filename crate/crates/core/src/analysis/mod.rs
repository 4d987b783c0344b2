//! Peak detection, Lorentzian fits, ringdowns, mode labeling and scan-map
//! profiles.

pub mod labeling;
pub mod lorentz;
pub mod peaks;
pub mod profile;
pub mod ringdown;

pub use labeling::{label_modes, Assignment, MeasuredPeak, ModeAssignment};
pub use lorentz::{fit_lorentzian, FitUncertainty, PeakFit};
pub use peaks::{detect_peaks, PeakWindow};
pub use profile::{classify_map_order, fit_waist, profile_residual, radial_profile, signed_values, RadialProfile};
pub use ringdown::{ringdown_q, Ringdown};
