//! Argument definitions. Every value flag overrides the matching config key.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "mirrormodes", version, about = "Acoustic modes, thermal noise and scans of mirror substrates")]
pub struct Cli {
    /// Run configuration (TOML); flags take precedence over its keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the modes of a free cylinder and write a catalog.
    PredictCyl(PredictCylArgs),
    /// Enumerate the gaussian modes of a plano-convex mirror and write a catalog.
    PredictGauss(PredictGaussArgs),
    /// Synthesize the thermal displacement spectrum of one or two catalogs.
    Synth(SynthArgs),
    /// Simulate a radiation-pressure raster scan of one catalog mode.
    Scan(ScanArgs),
    /// Detect, fit and label the peaks of a spectrum file.
    Analyze(AnalyzeArgs),
    /// Extract the radial profile of a scan map and fit its waist.
    Profile(ProfileArgs),
    /// Convert an optical frequency modulation into a displacement.
    Calibrate(CalibrateArgs),
}

macro_rules! set {
    ($slot:expr, $flag:expr) => {
        if let Some(v) = $flag.clone() {
            $slot = Some(v);
        }
    };
}

#[derive(Debug, Args)]
pub struct MaterialFlags {
    /// Material name, looked up in --material-file, then in
    /// $MIRRORMODES_MATERIAL_DIR, then in the bundled library.
    #[arg(long)]
    pub material: Option<String>,
    #[arg(long)]
    pub material_file: Option<PathBuf>,
}

impl MaterialFlags {
    fn apply(&self, cfg: &mut RunConfig) {
        set!(cfg.material.name, self.material);
        set!(cfg.material.file, self.material_file);
    }
}

#[derive(Debug, Args)]
pub struct GridFlags {
    /// Radial nodes of the stored shape grids.
    #[arg(long)]
    pub grid_r: Option<usize>,
    /// Angular nodes of the stored shape grids.
    #[arg(long)]
    pub grid_theta: Option<usize>,
}

impl GridFlags {
    fn apply(&self, cfg: &mut RunConfig) {
        set!(cfg.catalog.grid_r, self.grid_r);
        set!(cfg.catalog.grid_theta, self.grid_theta);
    }
}

#[derive(Debug, Args)]
pub struct BeamFlags {
    /// Probe beam waist (µm).
    #[arg(long)]
    pub waist_um: Option<f64>,
    #[arg(long)]
    pub wavelength_nm: Option<f64>,
    /// Beam centre on the face (mm).
    #[arg(long, allow_hyphen_values = true)]
    pub offset_x_mm: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub offset_y_mm: Option<f64>,
}

impl BeamFlags {
    fn apply(&self, cfg: &mut RunConfig) {
        set!(cfg.beam.waist_um, self.waist_um);
        set!(cfg.beam.wavelength_nm, self.wavelength_nm);
        set!(cfg.beam.offset_x_mm, self.offset_x_mm);
        set!(cfg.beam.offset_y_mm, self.offset_y_mm);
    }
}

#[derive(Debug, Args)]
pub struct PredictCylArgs {
    /// Catalog to write (JSON).
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub diameter_mm: Option<f64>,
    #[arg(long)]
    pub thickness_mm: Option<f64>,
    /// Radial trial functions per block.
    #[arg(long)]
    pub basis_order: Option<usize>,
    /// Largest circumferential order.
    #[arg(long)]
    pub n_max: Option<u32>,
    #[arg(long)]
    pub f_min_khz: Option<f64>,
    #[arg(long)]
    pub f_max_khz: Option<f64>,
    /// Quality factor given to every mode.
    #[arg(long)]
    pub q: Option<f64>,
    #[command(flatten)]
    pub material: MaterialFlags,
    #[command(flatten)]
    pub grid: GridFlags,
    #[command(flatten)]
    pub beam: BeamFlags,
}

impl PredictCylArgs {
    pub fn apply(&self, cfg: &mut RunConfig) {
        set!(cfg.cylinder.diameter_mm, self.diameter_mm);
        set!(cfg.cylinder.thickness_mm, self.thickness_mm);
        set!(cfg.cylinder.basis_order, self.basis_order);
        set!(cfg.cylinder.n_max, self.n_max);
        set!(cfg.cylinder.f_min_khz, self.f_min_khz);
        set!(cfg.cylinder.f_max_khz, self.f_max_khz);
        set!(cfg.cylinder.q, self.q);
        self.material.apply(cfg);
        self.grid.apply(cfg);
        self.beam.apply(cfg);
    }
}

#[derive(Debug, Args)]
pub struct PredictGaussArgs {
    /// Catalog to write (JSON).
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub diameter_mm: Option<f64>,
    #[arg(long)]
    pub curvature_radius_mm: Option<f64>,
    #[arg(long)]
    pub center_thickness_mm: Option<f64>,
    #[arg(long)]
    pub f_min_khz: Option<f64>,
    #[arg(long)]
    pub f_max_khz: Option<f64>,
    /// Quality factor for every mode instead of the overtone defaults.
    #[arg(long)]
    pub q: Option<f64>,
    #[command(flatten)]
    pub material: MaterialFlags,
    #[command(flatten)]
    pub grid: GridFlags,
    #[command(flatten)]
    pub beam: BeamFlags,
}

impl PredictGaussArgs {
    pub fn apply(&self, cfg: &mut RunConfig) {
        set!(cfg.mirror.diameter_mm, self.diameter_mm);
        set!(cfg.mirror.curvature_radius_mm, self.curvature_radius_mm);
        set!(cfg.mirror.center_thickness_mm, self.center_thickness_mm);
        set!(cfg.mirror.f_min_khz, self.f_min_khz);
        set!(cfg.mirror.f_max_khz, self.f_max_khz);
        set!(cfg.mirror.q, self.q);
        self.material.apply(cfg);
        self.grid.apply(cfg);
        self.beam.apply(cfg);
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Mode catalog; give it twice for the two mirrors of a cavity.
    #[arg(long, required = true, num_args = 1)]
    pub catalog: Vec<PathBuf>,
    /// Spectrum to write (CSV).
    #[arg(long)]
    pub out: PathBuf,
    /// Optional log-log plot (SVG).
    #[arg(long)]
    pub plot: Option<PathBuf>,
    #[arg(long)]
    pub f_start_khz: Option<f64>,
    #[arg(long)]
    pub f_stop_khz: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    /// Spectrum-analyzer resolution bandwidth (Hz).
    #[arg(long)]
    pub rbw_hz: Option<f64>,
    /// Add a white floor and periodogram scatter.
    #[arg(long)]
    pub add_noise: bool,
    /// White floor (m²/Hz); the spectrum median when absent.
    #[arg(long)]
    pub noise_floor: Option<f64>,
    #[arg(long)]
    pub averages: Option<u32>,
    /// Seed of the measurement-noise generator.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub temperature_k: Option<f64>,
    #[command(flatten)]
    pub beam: BeamFlags,
}

impl SynthArgs {
    pub fn apply(&self, cfg: &mut RunConfig) {
        set!(cfg.spectrum.f_start_khz, self.f_start_khz);
        set!(cfg.spectrum.f_stop_khz, self.f_stop_khz);
        set!(cfg.spectrum.points, self.points);
        set!(cfg.spectrum.rbw_hz, self.rbw_hz);
        if self.add_noise {
            cfg.spectrum.add_noise = Some(true);
        }
        set!(cfg.spectrum.noise_floor, self.noise_floor);
        set!(cfg.spectrum.averages, self.averages);
        set!(cfg.spectrum.seed, self.seed);
        set!(cfg.environment.temperature_k, self.temperature_k);
        self.beam.apply(cfg);
    }
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long)]
    pub catalog: PathBuf,
    /// Mode to drive, e.g. gauss:4,1,3 or cyl:0,1,3.
    #[arg(long)]
    pub mode: Option<String>,
    /// Map to write (CSV).
    #[arg(long)]
    pub out: PathBuf,
    /// Optional polar plot (SVG).
    #[arg(long)]
    pub plot: Option<PathBuf>,
    #[arg(long)]
    pub lines: Option<usize>,
    #[arg(long)]
    pub speed_mm_s: Option<f64>,
    #[arg(long)]
    pub power_w: Option<f64>,
    #[arg(long)]
    pub spot_waist_um: Option<f64>,
    /// Distance between samples along a line (mm).
    #[arg(long)]
    pub spacing_mm: Option<f64>,
    /// Disable the demodulation low-pass.
    #[arg(long)]
    pub no_low_pass: bool,
    /// Use the gaussian pump spot instead of a point force.
    #[arg(long)]
    pub finite_spot: bool,
    /// Drive frequency; the mode resonance when absent.
    #[arg(long)]
    pub drive_khz: Option<f64>,
    #[arg(long)]
    pub temperature_k: Option<f64>,
    #[command(flatten)]
    pub beam: BeamFlags,
}

impl ScanArgs {
    pub fn apply(&self, cfg: &mut RunConfig) {
        set!(cfg.scan.mode, self.mode);
        set!(cfg.scan.lines, self.lines);
        set!(cfg.scan.speed_mm_s, self.speed_mm_s);
        set!(cfg.scan.power_w, self.power_w);
        set!(cfg.scan.spot_waist_um, self.spot_waist_um);
        set!(cfg.scan.spacing_mm, self.spacing_mm);
        if self.no_low_pass {
            cfg.scan.low_pass = Some(false);
        }
        if self.finite_spot {
            cfg.scan.finite_spot = Some(true);
        }
        set!(cfg.scan.drive_khz, self.drive_khz);
        set!(cfg.environment.temperature_k, self.temperature_k);
        self.beam.apply(cfg);
    }
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Spectrum file written by `synth` (or in the same format).
    #[arg(long)]
    pub spectrum: PathBuf,
    /// Predicted catalog to label the peaks against.
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    /// Report to write (CSV).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Peak threshold in units of the spectrum median.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Relative tolerance of the assignment.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Circumferential order of the peak nearest a frequency, as KHZ:N
    /// (e.g. 332:0), typically read off a scan map.
    #[arg(long = "hint")]
    pub hints: Vec<String>,
    #[command(flatten)]
    pub beam: BeamFlags,
}

impl AnalyzeArgs {
    pub fn apply(&self, cfg: &mut RunConfig) {
        set!(cfg.analysis.threshold, self.threshold);
        set!(cfg.analysis.tolerance, self.tolerance);
        self.beam.apply(cfg);
    }
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    /// Map written by `scan`.
    #[arg(long)]
    pub map: PathBuf,
    /// Profile to write (CSV).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Compare against this waist instead of fitting one.
    #[arg(long)]
    pub waist_mm: Option<f64>,
    /// Azimuthal order; read from the map's mode by default.
    #[arg(long)]
    pub l: Option<u32>,
    /// Radial order; read from the map's mode by default.
    #[arg(long)]
    pub p: Option<u32>,
    #[arg(long)]
    pub node_guard: Option<f64>,
    #[arg(long)]
    pub bin_width_mm: Option<f64>,
}

impl ProfileArgs {
    pub fn apply(&self, cfg: &mut RunConfig) {
        set!(cfg.profile.waist_mm, self.waist_mm);
        set!(cfg.profile.node_guard, self.node_guard);
        set!(cfg.profile.bin_width_mm, self.bin_width_mm);
    }
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Peak optical frequency modulation (Hz).
    #[arg(long, allow_hyphen_values = true)]
    pub delta_nu_hz: f64,
    /// Optical frequency (Hz); derived from the wavelength when absent.
    #[arg(long)]
    pub nu_hz: Option<f64>,
    #[arg(long)]
    pub wavelength_nm: Option<f64>,
    /// Cavity length (mm).
    #[arg(long, allow_hyphen_values = true)]
    pub length_mm: f64,
}
