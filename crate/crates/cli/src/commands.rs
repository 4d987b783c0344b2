//! Subcommand bodies. Each one resolves and validates its whole
//! configuration and reads its inputs before computing, and writes its
//! outputs last.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use mirrormodes::analysis::{
    detect_peaks, fit_lorentzian, fit_waist, label_modes, profile_residual, radial_profile, MeasuredPeak, PeakFit,
};
use mirrormodes::cylinder::solve_modes;
use mirrormodes::gaussian::enumerate_modes;
use mirrormodes::model::SPEED_OF_LIGHT;
use mirrormodes::noise::{
    apply_rbw, calibrate_displacement, displacement_psd, effective_mass, twin_mirror_psd, Spectrum, SpectrumMeta,
};
use mirrormodes::scan::{contamination_warnings, raster_scan};
use mirrormodes::{Mode, ModeIndex, OpticalBeam};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::catalog;
use crate::cli::*;
use crate::config::{NoiseSettings, RunConfig};
use crate::error::{CliError, CliResult};
use crate::export;
use crate::plot;

fn print_catalog(modes: &[Mode], beam: &OpticalBeam) -> CliResult<()> {
    println!("{:<16} {:>12} {:>10} {:>12} {:>14}", "mode", "f_kHz", "Q", "mass_g", "M_eff_g");
    for m in modes {
        let eff = effective_mass(m, beam)?;
        let meff = if eff.is_infinite() {
            "inf".to_string()
        } else {
            format!("{:.4}", eff.mass * 1e3)
        };
        println!(
            "{:<16} {:>12.3} {:>10.0} {:>12.5} {:>14}",
            m.index.to_string(),
            m.frequency_hz() * 1e-3,
            m.quality_factor(),
            m.mass() * 1e3,
            meff
        );
    }
    Ok(())
}

pub fn predict_cyl(cfg: &RunConfig, args: &PredictCylArgs) -> CliResult<()> {
    let material = cfg.material()?;
    let geom = cfg.cylinder_geometry()?;
    let ritz = cfg.ritz()?;
    let (n_r, n_theta) = cfg.catalog_grid()?;
    let beam = cfg.beam()?;
    let modes: Vec<Mode> = solve_modes(&geom, &material, &ritz)?
        .iter()
        .map(|m| m.sampled(n_r, n_theta))
        .collect();
    print_catalog(&modes, &beam)?;
    catalog::write(&args.out, &modes, "predict-cyl")?;
    eprintln!("wrote {} modes to {}", modes.len(), args.out.display());
    Ok(())
}

pub fn predict_gauss(cfg: &RunConfig, args: &PredictGaussArgs) -> CliResult<()> {
    let material = cfg.material()?;
    let geom = cfg.mirror_geometry()?;
    let (lo, hi, phi) = cfg.mirror_window()?;
    let (n_r, n_theta) = cfg.catalog_grid()?;
    let beam = cfg.beam()?;
    if !geom.is_paraxial() {
        return Err(CliError::Model(mirrormodes::Error::Domain(format!(
            "R/h0 = {:.1} is below the paraxial limit; the gaussian solver does not apply",
            geom.curvature_radius() / geom.center_thickness()
        ))));
    }
    let modes: Vec<Mode> = enumerate_modes(&geom, &material, lo, hi, phi)?
        .iter()
        .map(|m| m.sampled(n_r, n_theta))
        .collect();
    print_catalog(&modes, &beam)?;
    catalog::write(&args.out, &modes, "predict-gauss")?;
    eprintln!("wrote {} modes to {}", modes.len(), args.out.display());
    Ok(())
}

/// Periodogram scatter of `averages` averages on top of a white floor.
fn add_measurement_noise(spec: &Spectrum, noise: &NoiseSettings) -> CliResult<Spectrum> {
    let floor = match noise.floor {
        Some(f) => f,
        None => {
            let mut v = spec.psd().to_vec();
            v.sort_by(f64::total_cmp);
            v[v.len() / 2]
        }
    };
    let k = noise.averages as f64;
    let gamma = Gamma::new(k, 1.0 / k).expect("positive shape and scale");
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let psd = spec.psd().iter().map(|s| (s + floor) * gamma.sample(&mut rng)).collect();
    Ok(Spectrum::new(*spec.grid(), psd, spec.meta.clone())?)
}

pub fn synth(cfg: &RunConfig, args: &SynthArgs) -> CliResult<()> {
    if args.catalog.len() > 2 {
        return Err(CliError::Usage(format!(
            "synth takes one or two catalogs, got {}",
            args.catalog.len()
        )));
    }
    let env = cfg.environment()?;
    let beam = cfg.beam()?;
    let grid = cfg.frequency_grid()?;
    let rbw = cfg.rbw()?;
    let noise = cfg.noise()?;
    let catalogs = args
        .catalog
        .iter()
        .map(|p| catalog::read(p))
        .collect::<CliResult<Vec<_>>>()?;

    let mut spec = match catalogs.as_slice() {
        [one] => {
            let mut s = displacement_psd(&one.modes, &beam, &env, &grid)?;
            s.meta = SpectrumMeta {
                rbw_hz: None,
                labels: vec![one.source.clone()],
            };
            s
        }
        [a, b] => twin_mirror_psd(&a.modes, &b.modes, &beam, &env, &grid)?,
        _ => unreachable!("clap requires at least one catalog"),
    };
    if let Some(rbw) = rbw {
        spec = apply_rbw(&spec, rbw)?;
    }
    if let Some(noise) = &noise {
        spec = add_measurement_noise(&spec, noise)?;
    }
    let svg = args.plot.as_ref().map(|_| plot::spectrum_svg(&spec, "thermal displacement noise"));
    if let Some(Err(e)) = svg {
        return Err(e);
    }
    export::write_spectrum(&args.out, &spec, env.temperature())?;
    if let (Some(path), Some(svg)) = (&args.plot, svg) {
        plot::write_svg(path, svg)?;
    }
    let visible: usize = catalogs
        .iter()
        .flat_map(|c| &c.modes)
        .map(|m| effective_mass(m, &beam).map(|e| !e.is_infinite()))
        .collect::<mirrormodes::Result<Vec<bool>>>()?
        .into_iter()
        .filter(|v| *v)
        .count();
    eprintln!(
        "wrote {} bins ({} visible modes) to {}",
        grid.len(),
        visible,
        args.out.display()
    );
    Ok(())
}

pub fn scan(cfg: &RunConfig, args: &ScanArgs) -> CliResult<()> {
    let env = cfg.environment()?;
    let beam = cfg.beam()?;
    let index = cfg.scan_mode()?;
    let scan_cfg = cfg.scan()?;
    let cat = catalog::read(&args.catalog)?;
    let mode = cat
        .modes
        .iter()
        .find(|m| m.index == index)
        .ok_or_else(|| CliError::Usage(format!("mode {index} is not in {}", args.catalog.display())))?;
    let mut map = raster_scan(mode, &beam, &env, &scan_cfg)?;
    map.warnings
        .extend(contamination_warnings(mode, &cat.modes, scan_cfg.omega_mod));
    let svg = args
        .plot
        .as_ref()
        .map(|_| plot::map_svg(&map, &format!("scan of {index}")));
    if let Some(Err(e)) = svg {
        return Err(e);
    }
    export::write_map(&args.out, &map)?;
    if let (Some(path), Some(svg)) = (&args.plot, svg) {
        plot::write_svg(path, svg)?;
    }
    let peak = map.points.iter().fold(0.0f64, |a, p| a.max(p.amplitude));
    println!("mode {index}: {} samples, peak {peak:.3e} m, blur {:.3e} m", map.points.len(), map.blur);
    if map.blur_warning {
        eprintln!("warning: blur exceeds 0.5 mm; the map does not resolve the mode");
    }
    for w in &map.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

fn parse_hint(text: &str) -> CliResult<(f64, u32)> {
    let bad = || CliError::Usage(format!("hint `{text}` is not KHZ:N"));
    let (f, n) = text.split_once(':').ok_or_else(bad)?;
    let f: f64 = f.trim().parse().map_err(|_| bad())?;
    let n: u32 = n.trim().parse().map_err(|_| bad())?;
    if !(f > 0.0 && f.is_finite()) {
        return Err(bad());
    }
    Ok((f * 1e3, n))
}

/// Fits, and the assignment when a catalog is given.
pub struct AnalysisReport {
    pub fits: Vec<PeakFit>,
    pub failures: Vec<(f64, String)>,
    pub assignment: Option<mirrormodes::analysis::ModeAssignment>,
    /// Catalog modes with a null overlap on the probe beam.
    pub invisible: Vec<ModeIndex>,
}

pub fn analyze_spectrum(
    spec: &Spectrum,
    temperature: f64,
    predicted: Option<&[Mode]>,
    beam: &OpticalBeam,
    threshold: f64,
    tolerance: f64,
    hints: &[(f64, u32)],
) -> CliResult<AnalysisReport> {
    let env = mirrormodes::Environment::new(temperature)?;
    let mut fits = Vec::new();
    let mut failures = Vec::new();
    for window in detect_peaks(spec, threshold) {
        match fit_lorentzian(spec, &window, &env) {
            Ok(fit) => fits.push(fit),
            Err(e) => failures.push((spec.grid().frequency(window.peak), e.to_string())),
        }
    }
    for &(f, n) in hints {
        let nearest = fits
            .iter_mut()
            .min_by(|a, b| (a.f_hz - f).abs().total_cmp(&(b.f_hz - f).abs()));
        match nearest {
            Some(fit) if (fit.f_hz - f).abs() <= tolerance * f => fit.circumferential_order = Some(n),
            _ => eprintln!("warning: no fitted peak near the hint at {:.3} kHz", f * 1e-3),
        }
    }
    let (assignment, invisible) = match predicted {
        Some(modes) => {
            let mut visible = Vec::new();
            let mut invisible = Vec::new();
            for m in modes {
                if effective_mass(m, beam)?.is_infinite() {
                    invisible.push(m.index);
                } else {
                    visible.push(m.clone());
                }
            }
            let measured: Vec<MeasuredPeak> = fits.iter().map(MeasuredPeak::from).collect();
            (Some(label_modes(&measured, &visible, tolerance)?), invisible)
        }
        None => (None, Vec::new()),
    };
    Ok(AnalysisReport {
        fits,
        failures,
        assignment,
        invisible,
    })
}

pub fn analyze(cfg: &RunConfig, args: &AnalyzeArgs) -> CliResult<()> {
    let threshold = cfg.threshold()?;
    let tolerance = cfg.tolerance()?;
    let beam = cfg.beam()?;
    let hints = args.hints.iter().map(|h| parse_hint(h)).collect::<CliResult<Vec<_>>>()?;
    let file = export::read_spectrum(&args.spectrum)?;
    let cat = args.catalog.as_ref().map(|p| catalog::read(p)).transpose()?;
    let report = analyze_spectrum(
        &file.spectrum,
        file.temperature,
        cat.as_ref().map(|c| c.modes.as_slice()),
        &beam,
        threshold,
        tolerance,
        &hints,
    )?;

    println!("{:>12} {:>10} {:>10} {:>12}", "f_kHz", "FWHM_Hz", "Q", "M_eff_g");
    for fit in &report.fits {
        println!(
            "{:>12.3} {:>10.3} {:>10.0} {:>12.5}",
            fit.f_hz * 1e-3,
            fit.linewidth_hz,
            fit.q,
            fit.m_eff * 1e3
        );
    }
    for (f, e) in &report.failures {
        eprintln!("warning: peak at {:.3} kHz not fitted: {e}", f * 1e-3);
    }
    let mut rows: Vec<Vec<String>> = Vec::new();
    let label_of = |f: f64| -> Option<&mirrormodes::analysis::Assignment> {
        report
            .assignment
            .as_ref()
            .and_then(|a| a.pairs.iter().find(|p| p.measured_hz == f))
    };
    for fit in &report.fits {
        let pair = label_of(fit.f_hz);
        rows.push(vec![
            fit.f_hz.to_string(),
            fit.linewidth_hz.to_string(),
            fit.q.to_string(),
            fit.m_eff.to_string(),
            pair.map_or(String::new(), |p| p.index.to_string()),
            pair.map_or(String::new(), |p| p.predicted_hz.to_string()),
            pair.map_or(String::new(), |p| p.relative_error.to_string()),
        ]);
    }
    if let Some(a) = &report.assignment {
        println!();
        println!("{:<16} {:>12} {:>12} {:>9}", "mode", "pred_kHz", "meas_kHz", "err_%");
        for p in &a.pairs {
            println!(
                "{:<16} {:>12.3} {:>12.3} {:>9.3}",
                p.index.to_string(),
                p.predicted_hz * 1e-3,
                p.measured_hz * 1e-3,
                p.relative_error * 100.0
            );
        }
        for (idx, f) in &a.unmatched_predicted {
            println!("{:<16} {:>12.3} {:>12} {:>9}", idx.to_string(), f * 1e-3, "-", "-");
            rows.push(vec![
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                idx.to_string(),
                f.to_string(),
                String::new(),
            ]);
        }
        for f in &a.unmatched_measured {
            println!("{:<16} {:>12} {:>12.3} {:>9}", "-", "-", f * 1e-3, "-");
        }
        if !report.invisible.is_empty() {
            eprintln!("{} catalog modes have a null overlap with the beam and were not matched", report.invisible.len());
        }
    }
    if let Some(out) = &args.out {
        let mut meta = BTreeMap::new();
        meta.insert("format".to_string(), "mirror-analysis".to_string());
        meta.insert("version".to_string(), "1".to_string());
        meta.insert("threshold".to_string(), threshold.to_string());
        meta.insert("tolerance".to_string(), tolerance.to_string());
        meta.insert("temperature_k".to_string(), file.temperature.to_string());
        export::write_table(
            out,
            &meta,
            &["f_hz", "linewidth_hz", "q", "m_eff_kg", "mode", "predicted_hz", "relative_error"],
            &rows,
        )?;
    }
    Ok(())
}

pub fn profile(cfg: &RunConfig, args: &ProfileArgs) -> CliResult<()> {
    let settings = cfg.profile_settings()?;
    let map = export::read_map(&args.map)?;
    let (default_l, default_p) = match map.mode {
        ModeIndex::Gauss(g) => (g.l, Some(g.p)),
        ModeIndex::Cyl(c) => (c.n, None),
    };
    let l = args.l.unwrap_or(default_l);
    let p = args.p.or(default_p);
    let prof = radial_profile(&map, l, settings.node_guard, settings.bin_width)?;
    for w in &prof.warnings {
        eprintln!("warning: {w}");
    }
    match p {
        Some(p) => {
            let (waist, fitted) = match settings.waist {
                Some(w) => (w, false),
                None => (fit_waist(&prof, l, p)?, true),
            };
            let residual = profile_residual(&prof, l, p, waist);
            println!(
                "waist {:.4} mm ({}), rms residual {:.3} %",
                waist * 1e3,
                if fitted { "fitted" } else { "fixed" },
                residual * 100.0
            );
        }
        None => println!("no radial order for {}; pass --p to fit a waist", map.mode),
    }
    if let Some(out) = &args.out {
        let mut meta = BTreeMap::new();
        meta.insert("format".to_string(), "mirror-radial-profile".to_string());
        meta.insert("version".to_string(), "1".to_string());
        meta.insert("mode".to_string(), map.mode.to_string());
        meta.insert("l".to_string(), l.to_string());
        let rows: Vec<Vec<String>> = prof
            .points
            .iter()
            .map(|pt| vec![pt.r.to_string(), pt.value.to_string(), pt.samples.to_string()])
            .collect();
        export::write_table(out, &meta, &["r_m", "value_m", "samples"], &rows)?;
    }
    Ok(())
}

pub fn calibrate(args: &CalibrateArgs) -> CliResult<()> {
    let nu = match (args.nu_hz, args.wavelength_nm) {
        (Some(_), Some(_)) => {
            return Err(CliError::Usage("give either --nu-hz or --wavelength-nm, not both".into()));
        }
        (Some(nu), None) => nu,
        (None, w) => {
            let w = w.unwrap_or(810.0);
            if !(w > 0.0 && w.is_finite()) {
                return Err(CliError::Usage(format!("wavelength {w} nm must be positive")));
            }
            SPEED_OF_LIGHT / (w * 1e-9)
        }
    };
    if !args.delta_nu_hz.is_finite() {
        return Err(CliError::Usage("--delta-nu-hz must be finite".into()));
    }
    let du = calibrate_displacement(args.delta_nu_hz, nu, args.length_mm * 1e-3)?;
    println!("{du:e} m");
    eprintln!(
        "phase shift {:.4e} rad at {:.1} nm",
        4.0 * PI * du * nu / SPEED_OF_LIGHT,
        SPEED_OF_LIGHT / nu * 1e9
    );
    Ok(())
}

pub fn dispatch(cli: &Cli) -> CliResult<()> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let outputs: Vec<&Path> = match &cli.command {
        Command::PredictCyl(a) => vec![&a.out],
        Command::PredictGauss(a) => vec![&a.out],
        Command::Synth(a) => std::iter::once(&a.out).chain(&a.plot).map(|p| p.as_path()).collect(),
        Command::Scan(a) => std::iter::once(&a.out).chain(&a.plot).map(|p| p.as_path()).collect(),
        Command::Analyze(a) => a.out.iter().map(|p| p.as_path()).collect(),
        Command::Profile(a) => a.out.iter().map(|p| p.as_path()).collect(),
        Command::Calibrate(_) => Vec::new(),
    };
    check_output_dirs(&outputs)?;
    match &cli.command {
        Command::PredictCyl(a) => {
            a.apply(&mut cfg);
            predict_cyl(&cfg, a)
        }
        Command::PredictGauss(a) => {
            a.apply(&mut cfg);
            predict_gauss(&cfg, a)
        }
        Command::Synth(a) => {
            a.apply(&mut cfg);
            synth(&cfg, a)
        }
        Command::Scan(a) => {
            a.apply(&mut cfg);
            scan(&cfg, a)
        }
        Command::Analyze(a) => {
            a.apply(&mut cfg);
            analyze(&cfg, a)
        }
        Command::Profile(a) => {
            a.apply(&mut cfg);
            profile(&cfg, a)
        }
        Command::Calibrate(a) => calibrate(a),
    }
}

/// Checks that every path an output flag names can be created, so a run
/// fails before computing rather than after.
pub fn check_output_dirs(paths: &[&Path]) -> CliResult<()> {
    for path in paths {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            if !parent.is_dir() {
                return Err(CliError::Usage(format!(
                    "output directory {} does not exist",
                    parent.display()
                )));
            }
        }
    }
    Ok(())
}
