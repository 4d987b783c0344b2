use std::sync::OnceLock;

use mirrormodes::cylinder::{
    classify, mode_mass, rigid_body_count, solve_block, solve_modes, CylIndex, Parity, RitzConfig,
};
use mirrormodes::model::NORMALIZATION_SAMPLES;
use mirrormodes::noise::effective_mass;
use mirrormodes::{CylinderGeometry, Material, Mode, ModeIndex, ModeShape, OpticalBeam};
use proptest::prelude::*;

fn geometry() -> CylinderGeometry {
    CylinderGeometry::from_diameter(25.4e-3, 6.35e-3).unwrap()
}

fn catalog() -> &'static [Mode] {
    static MODES: OnceLock<Vec<Mode>> = OnceLock::new();
    MODES.get_or_init(|| solve_modes(&geometry(), &Material::fused_silica(), &RitzConfig::default()).unwrap())
}

fn find(n: u32, xi: u8, m: u32) -> &'static Mode {
    let idx = ModeIndex::Cyl(CylIndex::new(n, xi, m).unwrap());
    catalog().iter().find(|md| md.index == idx).unwrap()
}

/// (n, ξ, m, kHz) rows of the published cylinder table.
const TABLE: [(u32, u8, u32, f64); 21] = [
    (0, 0, 1, 143.0),
    (0, 0, 2, 377.0),
    (0, 0, 3, 405.0),
    (0, 0, 4, 460.0),
    (0, 0, 5, 468.0),
    (0, 0, 6, 483.0),
    (0, 1, 1, 73.0),
    (0, 1, 2, 210.0),
    (0, 1, 3, 330.0),
    (0, 1, 4, 406.0),
    (0, 1, 5, 491.0),
    (1, 0, 5, 435.0),
    (1, 1, 1, 135.0),
    (1, 1, 2, 268.0),
    (1, 1, 3, 317.0),
    (1, 1, 4, 334.0),
    (1, 1, 5, 400.0),
    (1, 1, 6, 436.0),
    (1, 1, 7, 475.0),
    (2, 1, 3, 314.0),
    (2, 1, 6, 459.0),
];

#[test]
fn table_frequencies_within_three_percent() {
    for (n, xi, m, khz) in TABLE {
        let f = find(n, xi, m).frequency_hz() / 1e3;
        assert!((f / khz - 1.0).abs() < 0.03, "({n} {xi} {m}): {f:.1} kHz vs {khz}");
    }
}

#[test]
fn lowest_modes() {
    let f = |n, xi, m| find(n, xi, m).frequency_hz();
    assert!((f(0, 1, 1) / 73e3 - 1.0).abs() < 0.03);
    assert!((f(0, 0, 1) / 143e3 - 1.0).abs() < 0.03);
    assert!((f(1, 1, 1) / 135e3 - 1.0).abs() < 0.03);
    // lowest axisymmetric mode is the drum mode
    let lowest_n0 = catalog().iter().find(|md| md.index.azimuthal_order() == 0).unwrap();
    assert_eq!(lowest_n0.index, ModeIndex::Cyl(CylIndex::new(0, 1, 1).unwrap()));
}

#[test]
fn catalog_is_sorted_and_ranked() {
    let modes = catalog();
    for pair in modes.windows(2) {
        assert!(pair[0].omega() <= pair[1].omega());
    }
    for md in modes {
        let ModeIndex::Cyl(idx) = md.index else { panic!() };
        if idx.m > 1 {
            let prev = find(idx.n, idx.xi, idx.m - 1);
            assert!(prev.omega() < md.omega(), "{}", md.index);
        }
    }
}

#[test]
fn six_rigid_body_modes() {
    let cfg = RitzConfig {
        n_max: 3,
        ..RitzConfig::default()
    };
    assert_eq!(rigid_body_count(&geometry(), &Material::fused_silica(), &cfg).unwrap(), 6);
    assert!(catalog().iter().all(|md| md.frequency_hz() >= 1.0));
}

#[test]
fn frequencies_decrease_with_basis_order() {
    let g = geometry();
    let mat = Material::fused_silica();
    for (n, parity) in [(0, Parity::Flexural), (0, Parity::Extensional), (1, Parity::Flexural), (2, Parity::Extensional)] {
        let spectra: Vec<Vec<f64>> = [6, 8, 10, 12]
            .iter()
            .map(|&order| {
                solve_block(&g, &mat, n, parity, false, order)
                    .unwrap()
                    .frequencies_hz()
                    .into_iter()
                    .filter(|f| f.abs() >= 1.0)
                    .collect()
            })
            .collect();
        for pair in spectra.windows(2) {
            for k in 0..8 {
                assert!(
                    pair[1][k] <= pair[0][k] * (1.0 + 1e-10),
                    "block ({n}, {parity:?}) mode {k}: {} then {}",
                    pair[0][k],
                    pair[1][k]
                );
            }
        }
    }
}

#[test]
fn block_modes_are_mass_orthogonal() {
    let g = geometry();
    let mat = Material::fused_silica();
    for (n, parity) in [(0, Parity::Flexural), (1, Parity::Extensional), (3, Parity::Flexural)] {
        let sol = solve_block(&g, &mat, n, parity, false, 10).unwrap();
        for i in 0..12 {
            for j in 0..i {
                let mij = sol.mass_inner(i, j);
                let scale = (sol.mass_inner(i, i) * sol.mass_inner(j, j)).sqrt();
                assert!(mij.abs() < 1e-8 * scale, "({n}, {parity:?}) {i} {j}: {mij:e}");
            }
        }
    }
}

#[test]
fn shapes_peak_at_unity_on_the_canonical_grid() {
    let n = NORMALIZATION_SAMPLES;
    for md in catalog().iter().filter(|md| md.frequency_hz() < 350e3) {
        let radius = md.shape.face_radius();
        let mut peak = 0.0f64;
        for i in 0..n {
            let r = radius * i as f64 / (n - 1) as f64;
            for j in 0..n {
                let t = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
                peak = peak.max(md.shape.surface_polar(r, t).abs());
            }
        }
        assert!((peak - 1.0).abs() < 1e-12, "{}: {peak}", md.index);
    }
}

#[test]
fn classification_recovers_block_labels() {
    for md in catalog().iter().take(40) {
        let (ModeIndex::Cyl(idx), ModeShape::Cylinder(shape)) = (md.index, &md.shape) else { panic!() };
        let (n, parity) = classify(shape).unwrap();
        assert_eq!((n, parity.xi()), (idx.n, idx.xi));
    }
}

#[test]
fn modal_mass_matches_direct_integration() {
    let mat = Material::fused_silica();
    for (n, xi, m) in [(0, 1, 1), (0, 0, 1), (1, 1, 1), (2, 1, 3)] {
        let md = find(n, xi, m);
        let direct = mode_mass(md, &mat).unwrap();
        assert!((direct / md.mass() - 1.0).abs() < 1e-6, "({n} {xi} {m}) {direct} {}", md.mass());
    }
}

#[test]
fn masses_at_the_mirror_centre() {
    let beam = OpticalBeam::new(62.5e-6, 810e-9).unwrap();
    let mut masses: Vec<(ModeIndex, f64)> = TABLE
        .iter()
        .filter(|row| row.0 == 0)
        .map(|&(n, xi, m, _)| {
            let md = find(n, xi, m);
            (md.index, effective_mass(md, &beam).unwrap().mass)
        })
        .collect();
    masses.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (heaviest, m003) = *masses.last().unwrap();
    assert_eq!(heaviest, ModeIndex::Cyl(CylIndex::new(0, 0, 3).unwrap()));
    assert!((m003 / 0.550 - 1.0).abs() < 0.5, "{m003}");
    let median = masses[masses.len() / 2].1;
    assert!(median < 3e-3, "{median}");
    // the heaviest dwarfs the typical mode
    assert!(m003 > 100.0 * median);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn frequencies_scale_inversely_with_size(s in 0.2f64..5.0, n in 0u32..4, flexural: bool) {
        let g = geometry();
        let mat = Material::fused_silica();
        let parity = if flexural { Parity::Flexural } else { Parity::Extensional };
        let base = solve_block(&g, &mat, n, parity, false, 8).unwrap().frequencies_hz();
        let scaled = solve_block(&g.scaled(s).unwrap(), &mat, n, parity, false, 8).unwrap().frequencies_hz();
        for (a, b) in base.iter().zip(&scaled).filter(|(a, _)| a.abs() > 1.0).take(10) {
            prop_assert!((b * s / a - 1.0).abs() < 1e-6, "{} {}", a, b);
        }
    }
}
