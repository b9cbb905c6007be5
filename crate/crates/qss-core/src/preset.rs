//! Initial-data constructors.

use ndarray::{ArrayD, IxDyn};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldPair;
use crate::grid::Grid;
use crate::snapshot::load_snapshot;
use crate::transform::inverse_array;

/// Built-in initial states, all centered in the box.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Preset {
    /// `u = a_u exp(-|x|²/(2σ²))`, `v = a_v exp(-|x|²/(2σ²))`.
    Gaussian { amp_u: f64, amp_v: f64, sigma: f64 },
    /// `u = a_u e^{ik·x}`, `v = a_v e^{ik·x}` with `k_j = 2π m_j / L_j`.
    PlaneWave {
        mode: Vec<i64>,
        amp_u: f64,
        amp_v: f64,
    },
    /// Load `(u, v)` from a `QSS1` snapshot; grid must match.
    GroundStateFile { path: String },
}

pub fn sample_preset(grid: &Grid, preset: &Preset) -> Result<FieldPair> {
    match preset {
        Preset::Gaussian { amp_u, amp_v, sigma } => {
            if !(*sigma > 0.0) {
                return Err(Error::Params(format!(
                    "gaussian width must be positive, got {sigma}"
                )));
            }
            let r2 = grid.radius_sq();
            let mut fields = FieldPair::zeros(grid);
            let denom = 2.0 * sigma * sigma;
            for ((u, v), &r) in fields.u.iter_mut().zip(fields.v.iter_mut()).zip(r2.iter()) {
                let g = (-r / denom).exp();
                *u = Complex64::new(amp_u * g, 0.0);
                *v = Complex64::new(amp_v * g, 0.0);
            }
            Ok(fields)
        }
        Preset::PlaneWave { mode, amp_u, amp_v } => {
            if mode.len() != grid.spatial_dim() {
                return Err(Error::Params(format!(
                    "plane-wave mode has {} entries, grid has {} axes",
                    mode.len(),
                    grid.spatial_dim()
                )));
            }
            let mut fields = FieldPair::zeros(grid);
            let ks: Vec<f64> = mode
                .iter()
                .zip(grid.lengths())
                .map(|(&m, &l)| 2.0 * std::f64::consts::PI * m as f64 / l)
                .collect();
            let shape = IxDyn(grid.shape());
            for (idx, (u, v)) in ndarray::indices(shape)
                .into_iter()
                .zip(fields.u.iter_mut().zip(fields.v.iter_mut()))
            {
                let phase: f64 = ks
                    .iter()
                    .enumerate()
                    .map(|(j, k)| k * grid.coords(j)[idx[j]])
                    .sum();
                let e = Complex64::from_polar(1.0, phase);
                *u = amp_u * e;
                *v = amp_v * e;
            }
            Ok(fields)
        }
        Preset::GroundStateFile { path } => {
            let (fields, file_grid, _, _) = load_snapshot(path)?;
            if file_grid != *grid {
                return Err(Error::Shape {
                    expected: grid.shape().to_vec(),
                    got: file_grid.shape().to_vec(),
                });
            }
            Ok(fields)
        }
    }
}

/// Smooth random pair for perturbation experiments: complex Gaussian
/// spectral coefficients on modes `|m_j| <= k_cut`, transformed to physical
/// space and localized by a Gaussian envelope so the sample decays in the
/// box. Deterministic for a fixed RNG state.
pub fn random_smooth_pair(grid: &Grid, rng: &mut impl Rng, k_cut: usize) -> FieldPair {
    let shape = IxDyn(grid.shape());
    let mut draw = |_: ()| -> ArrayD<Complex64> {
        let mut spec = ArrayD::<Complex64>::zeros(shape.clone());
        for (idx, c) in spec.indexed_iter_mut() {
            let in_band = (0..grid.spatial_dim()).all(|j| {
                let n = grid.points()[j];
                let i = idx[j];
                let m = if i < n / 2 { i as i64 } else { i as i64 - n as i64 };
                m.unsigned_abs() as usize <= k_cut
            });
            if in_band {
                *c = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            }
        }
        inverse_array(&spec, grid)
    };
    let mut fields = FieldPair {
        u: draw(()),
        v: draw(()),
    };
    let sigma = grid.lengths().iter().cloned().fold(f64::INFINITY, f64::min) / 8.0;
    let r2 = grid.radius_sq();
    let denom = 2.0 * sigma * sigma;
    for ((u, v), &r) in fields.u.iter_mut().zip(fields.v.iter_mut()).zip(r2.iter()) {
        let g = (-r / denom).exp();
        *u *= g;
        *v *= g;
    }
    fields
}
