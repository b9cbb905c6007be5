//! Transforms, Parseval, presets against closed forms, and the snapshot
//! format.

mod common;

use common::{assert_rel, rng, sample_fn};
use ndarray::{ArrayD, IxDyn};
use num_complex::Complex64;
use rand::Rng;

use qss_core::field::FieldPair;
use qss_core::grid::Grid;
use qss_core::observables::mass;
use qss_core::preset::{sample_preset, Preset};
use qss_core::snapshot::{load_snapshot, save_snapshot};
use qss_core::transform::{forward_transform, inverse_transform, spectral_mass};
use qss_core::PhysicsParams;

fn random_pair(grid: &Grid, seed: u64) -> FieldPair {
    let mut r = rng(seed);
    let shape = IxDyn(grid.shape());
    let mut draw = || {
        let mut a = ArrayD::<Complex64>::zeros(shape.clone());
        for c in a.iter_mut() {
            *c = Complex64::new(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5);
        }
        a
    };
    FieldPair {
        u: draw(),
        v: draw(),
    }
}

#[test]
fn round_trip_across_dimensions() {
    // All supported n with uneven axis sizes and lengths.
    let cases: Vec<(usize, Vec<usize>, Vec<f64>)> = vec![
        (2, vec![32, 16], vec![7.0, 11.0]),
        (3, vec![16, 8, 12], vec![5.0, 3.0, 9.0]),
        (4, vec![8, 8, 10, 8], vec![4.0, 6.0, 5.0, 3.0]),
        (5, vec![8, 8, 8, 8, 8], vec![4.0; 5]),
    ];
    for (n, points, lengths) in cases {
        let grid = Grid::new(n, &points, &lengths).unwrap();
        let fields = random_pair(&grid, 42 + n as u64);
        let spec = forward_transform(&fields, &grid).unwrap();
        let back = inverse_transform(&spec, &grid).unwrap();
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for (a, b) in back.u.iter().zip(fields.u.iter()) {
            worst = worst.max((a - b).norm());
            scale = scale.max(b.norm());
        }
        for (a, b) in back.v.iter().zip(fields.v.iter()) {
            worst = worst.max((a - b).norm());
            scale = scale.max(b.norm());
        }
        assert!(
            worst <= 1e-13 * scale.max(1.0),
            "round-trip error {worst:.3e} at n = {n}"
        );
    }
}

#[test]
fn parseval_identity() {
    for seed in 0..10 {
        let grid = Grid::new(3, &[16, 12, 8], &[6.0, 9.0, 4.0]).unwrap();
        let fields = random_pair(&grid, seed);
        let spec = forward_transform(&fields, &grid).unwrap();
        let dv = grid.cell_volume();
        let phys: f64 = fields.u.iter().map(|c| c.norm_sqr()).sum::<f64>() * dv;
        let spect = spectral_mass(&spec.u_hat, &grid);
        assert_rel(spect, phys, 1e-12, "Parseval");
    }
}

#[test]
fn gaussian_preset_mass_matches_closed_form_and_quadrature() {
    // n = 2, unit amplitude and width: ∫|u|² = (σ√π)ⁿ = π.
    let grid = Grid::new(2, &[128, 128], &[20.0, 20.0]).unwrap();
    let fields = sample_preset(
        &grid,
        &Preset::Gaussian {
            amp_u: 1.0,
            amp_v: 0.0,
            sigma: 1.0,
        },
    )
    .unwrap();
    let m = mass(&fields, &grid);
    assert_rel(m, std::f64::consts::PI, 1e-10, "gaussian mass closed form");

    // Independent oracle: 1-D high-resolution rectangle quadrature, squared
    // by separability.
    let fine = 1 << 16;
    let h = 20.0 / fine as f64;
    let one_d: f64 = (0..fine)
        .map(|i| {
            let x = i as f64 * h - 10.0;
            (-x * x).exp() * h
        })
        .sum();
    assert_rel(m, one_d * one_d, 1e-12, "gaussian mass vs fine quadrature");
}

#[test]
fn snapshot_round_trip_is_bit_exact() {
    let grid = Grid::new(3, &[8, 12, 10], &[3.0, 4.0, 5.0]).unwrap();
    let params = PhysicsParams::new(1.0, 2.0, -0.5, 1.25).unwrap();
    let fields = random_pair(&grid, 7);
    let dir = std::env::temp_dir().join("qss_snapshot_test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("state.qss1");

    save_snapshot(&fields, &grid, &params, 0.375, &path).unwrap();
    let (loaded, lgrid, lparams, t) = load_snapshot(&path).unwrap();

    assert_eq!(t.to_bits(), 0.375f64.to_bits());
    assert_eq!(lgrid, grid);
    assert_eq!(lparams, params);
    for (a, b) in loaded.u.iter().zip(fields.u.iter()) {
        assert_eq!(a.re.to_bits(), b.re.to_bits());
        assert_eq!(a.im.to_bits(), b.im.to_bits());
    }
    for (a, b) in loaded.v.iter().zip(fields.v.iter()) {
        assert_eq!(a.re.to_bits(), b.re.to_bits());
        assert_eq!(a.im.to_bits(), b.im.to_bits());
    }
}

#[test]
fn snapshot_rejects_corruption() {
    let grid = Grid::new(2, &[8, 8], &[3.0, 3.0]).unwrap();
    let params = PhysicsParams::new(1.0, 1.0, 0.0, 1.0).unwrap();
    let fields = random_pair(&grid, 9);
    let dir = std::env::temp_dir().join("qss_snapshot_test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("corrupt.qss1");
    save_snapshot(&fields, &grid, &params, 0.0, &path).unwrap();
    let bytes = std::fs::read(&path).unwrap();

    // Truncated payload.
    let truncated = &bytes[..bytes.len() - 16];
    let tpath = dir.join("truncated.qss1");
    std::fs::write(&tpath, truncated).unwrap();
    let err = load_snapshot(&tpath).unwrap_err();
    assert!(format!("{err}").contains("shorter"), "got: {err}");

    // Bad magic.
    let mut bad = bytes.clone();
    bad[0] = b'X';
    let bpath = dir.join("badmagic.qss1");
    std::fs::write(&bpath, &bad).unwrap();
    assert!(load_snapshot(&bpath).is_err());

    // Header dims larger than payload: declare 32x32 points.
    let (mut fields2, _) = (fields.clone(), ());
    fields2.u = ArrayD::zeros(IxDyn(&[8, 8]));
    let header_end = 8 + u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let header = String::from_utf8(bytes[8..header_end].to_vec()).unwrap();
    let inflated = header.replace("[8,8]", "[32,32]");
    assert_ne!(inflated, header);
    let mut forged = Vec::new();
    forged.extend_from_slice(&bytes[..4]);
    forged.extend_from_slice(&(inflated.len() as u32).to_le_bytes());
    forged.extend_from_slice(inflated.as_bytes());
    forged.extend_from_slice(&bytes[header_end..]);
    let fpath = dir.join("inflated.qss1");
    std::fs::write(&fpath, &forged).unwrap();
    let err = load_snapshot(&fpath).unwrap_err();
    assert!(format!("{err}").contains("shorter"), "got: {err}");
}

#[test]
fn plane_wave_mode_lands_on_single_coefficient() {
    let grid = Grid::new(2, &[16, 16], &[5.0, 5.0]).unwrap();
    let fields = sample_preset(
        &grid,
        &Preset::PlaneWave {
            mode: vec![1, 0],
            amp_u: 1.0,
            amp_v: 0.0,
        },
    )
    .unwrap();
    let spec = forward_transform(&fields, &grid).unwrap();
    for (idx, c) in spec.u_hat.indexed_iter() {
        if idx[0] == 1 && idx[1] == 0 {
            assert!(c.norm() > 1.0);
        } else {
            assert!(c.norm() < 1e-10);
        }
    }
}

#[test]
fn centered_gaussian_matches_analytic_samples() {
    // The preset and direct evaluation agree pointwise.
    let grid = Grid::new(2, &[32, 32], &[12.0, 14.0]).unwrap();
    let preset = sample_preset(
        &grid,
        &Preset::Gaussian {
            amp_u: 0.7,
            amp_v: 0.2,
            sigma: 1.3,
        },
    )
    .unwrap();
    let direct = sample_fn(&grid, |x| {
        let r2: f64 = x.iter().map(|&xi| xi * xi).sum();
        Complex64::new(0.7 * (-r2 / (2.0 * 1.3 * 1.3)).exp(), 0.0)
    });
    for (a, b) in preset.u.iter().zip(direct.iter()) {
        assert!((a - b).norm() < 1e-15);
    }
}
