//! Periodic computational box in `n = d + 1` dimensions.
//!
//! The last axis is the distinguished one: the anisotropic Laplacian weights
//! its second derivative by `gamma`, and the "transverse" quantities run over
//! the first `d` axes only. Coordinates are box-centered, `x_j ∈ [-L_j/2,
//! L_j/2)`, sampled on a uniform lattice, and wavenumbers are the usual
//! periodic set `2π m / L_j`, `m = -N_j/2 … N_j/2 - 1`, stored in FFT order.

use ndarray::{ArrayD, IxDyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 5;
pub const MIN_POINTS: usize = 8;

/// Periodic grid with precomputed coordinate and wavenumber tables.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<usize>,
    lengths: Vec<f64>,
    coords: Vec<Vec<f64>>,
    waves: Vec<Vec<f64>>,
}

impl Grid {
    /// Build a grid with `points[j]` samples on a box of side `lengths[j]`.
    pub fn new(spatial_dim: usize, points: &[usize], lengths: &[f64]) -> Result<Self> {
        if !(MIN_DIM..=MAX_DIM).contains(&spatial_dim) {
            return Err(Error::Grid(format!(
                "spatial dimension must be in [{MIN_DIM}, {MAX_DIM}] (transverse dimension d in [1, 4]), got {spatial_dim}"
            )));
        }
        if points.len() != spatial_dim || lengths.len() != spatial_dim {
            return Err(Error::Grid(format!(
                "expected {spatial_dim} axis sizes and lengths, got {} and {}",
                points.len(),
                lengths.len()
            )));
        }
        for (j, &n) in points.iter().enumerate() {
            if n < MIN_POINTS || n % 2 != 0 {
                return Err(Error::Grid(format!(
                    "points per axis must be even and >= {MIN_POINTS}, got {n} on axis {j}"
                )));
            }
        }
        for (j, &l) in lengths.iter().enumerate() {
            if !(l > 0.0) || !l.is_finite() {
                return Err(Error::Grid(format!(
                    "box length must be positive and finite, got {l} on axis {j}"
                )));
            }
        }

        let coords = points
            .iter()
            .zip(lengths)
            .map(|(&n, &l)| {
                let h = l / n as f64;
                (0..n).map(|i| i as f64 * h - l / 2.0).collect()
            })
            .collect();
        // FFT ordering: m = 0, 1, …, N/2-1, -N/2, …, -1.
        let waves = points
            .iter()
            .zip(lengths)
            .map(|(&n, &l)| {
                let scale = 2.0 * std::f64::consts::PI / l;
                (0..n)
                    .map(|i| {
                        let m = if i < n / 2 { i as i64 } else { i as i64 - n as i64 };
                        scale * m as f64
                    })
                    .collect()
            })
            .collect();

        Ok(Self {
            points: points.to_vec(),
            lengths: lengths.to_vec(),
            coords,
            waves,
        })
    }

    /// Total dimension `n = d + 1`.
    pub fn spatial_dim(&self) -> usize {
        self.points.len()
    }

    /// Transverse dimension `d` (the last axis is excluded).
    pub fn transverse_dim(&self) -> usize {
        self.points.len() - 1
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn shape(&self) -> &[usize] {
        &self.points
    }

    pub fn total_points(&self) -> usize {
        self.points.iter().product()
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.points[axis] as f64
    }

    /// Volume of one lattice cell; the rectangle-rule quadrature weight.
    pub fn cell_volume(&self) -> f64 {
        self.points
            .iter()
            .zip(&self.lengths)
            .map(|(&n, &l)| l / n as f64)
            .product()
    }

    pub fn box_volume(&self) -> f64 {
        self.lengths.iter().product()
    }

    /// Centered sample coordinates along `axis`.
    pub fn coords(&self, axis: usize) -> &[f64] {
        &self.coords[axis]
    }

    /// Wavenumbers along `axis` in FFT order.
    pub fn waves(&self, axis: usize) -> &[f64] {
        &self.waves[axis]
    }

    /// Full coordinate field of `axis` broadcast over the grid.
    pub fn coordinate_field(&self, axis: usize) -> ArrayD<f64> {
        let coords = &self.coords[axis];
        ArrayD::from_shape_fn(IxDyn(&self.points), |idx| coords[idx[axis]])
    }

    /// Pointwise `|x|²` over the whole box.
    pub fn radius_sq(&self) -> ArrayD<f64> {
        self.weighted_coord_sq(&vec![1.0; self.spatial_dim()])
    }

    /// Pointwise `|x_⊥|²`: the last axis carries no weight.
    pub fn radius_sq_perp(&self) -> ArrayD<f64> {
        let mut w = vec![1.0; self.spatial_dim()];
        *w.last_mut().unwrap() = 0.0;
        self.weighted_coord_sq(&w)
    }

    /// `Σ_j w_j x_j²` over the grid.
    pub fn weighted_coord_sq(&self, weights: &[f64]) -> ArrayD<f64> {
        assert_eq!(weights.len(), self.spatial_dim());
        ArrayD::from_shape_fn(IxDyn(&self.points), |idx| {
            self.coords
                .iter()
                .zip(weights)
                .enumerate()
                .map(|(j, (c, &w))| w * c[idx[j]] * c[idx[j]])
                .sum()
        })
    }

    /// `Σ_j w_j k_j²` in spectral (FFT) ordering.
    pub fn weighted_wave_sq(&self, weights: &[f64]) -> ArrayD<f64> {
        assert_eq!(weights.len(), self.spatial_dim());
        ArrayD::from_shape_fn(IxDyn(&self.points), |idx| {
            self.waves
                .iter()
                .zip(weights)
                .enumerate()
                .map(|(j, (k, &w))| w * k[idx[j]] * k[idx[j]])
                .sum()
        })
    }

    /// Rectangle-rule integral of a real field.
    pub fn integrate(&self, field: &ArrayD<f64>) -> f64 {
        debug_assert_eq!(field.shape(), self.shape());
        field.sum() * self.cell_volume()
    }
}

/// Symbol of `-Δ_γ`: the multiplier `|k|²_γ = k_1² + … + k_d² + γ k_{d+1}²`.
pub fn laplacian_symbol(grid: &Grid, gamma: f64) -> Result<ArrayD<f64>> {
    if !(gamma > 0.0) {
        return Err(Error::Params(format!(
            "anisotropy coefficient must be positive, got {gamma}"
        )));
    }
    let mut w = vec![1.0; grid.spatial_dim()];
    *w.last_mut().unwrap() = gamma;
    Ok(grid.weighted_wave_sq(&w))
}

/// Coefficients of the evolution and stationary systems.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicsParams {
    pub gamma1: f64,
    pub gamma2: f64,
    pub beta: f64,
    pub omega: f64,
}

impl PhysicsParams {
    /// Elliptic-elliptic case: both anisotropy coefficients positive.
    pub fn new(gamma1: f64, gamma2: f64, beta: f64, omega: f64) -> Result<Self> {
        if !(gamma1 > 0.0) || !(gamma2 > 0.0) {
            return Err(Error::Params(format!(
                "gamma1 and gamma2 must be positive (elliptic-elliptic case), got ({gamma1}, {gamma2})"
            )));
        }
        if ![beta, omega].iter().all(|x| x.is_finite()) {
            return Err(Error::Params("beta and omega must be finite".into()));
        }
        Ok(Self {
            gamma1,
            gamma2,
            beta,
            omega,
        })
    }

    /// Standing-wave operations additionally need `ω > 0` and `4ω + β > 0`.
    pub fn require_bound_state_admissible(&self) -> Result<()> {
        if !(self.omega > 0.0) || !(4.0 * self.omega + self.beta > 0.0) {
            return Err(Error::Params(format!(
                "bound states require omega > 0 and 4*omega + beta > 0, got omega = {}, beta = {}",
                self.omega, self.beta
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_coordinates() {
        let g = Grid::new(2, &[8, 8], &[1.0, 1.0]).unwrap();
        assert_eq!(g.spacing(0), 0.125);
        assert_eq!(g.spacing(1), 0.125);
        assert_eq!(g.coords(0)[0], -0.5);
        assert_eq!(*g.coords(0).last().unwrap(), 0.5 - 0.125);
    }

    #[test]
    fn rejects_odd_points() {
        assert!(Grid::new(2, &[7, 8], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn rejects_tiny_axes() {
        assert!(Grid::new(2, &[4, 8], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn rejects_out_of_range_dimension() {
        assert!(Grid::new(6, &[8; 6], &[1.0; 6]).is_err());
        assert!(Grid::new(1, &[8], &[1.0]).is_err());
    }

    #[test]
    fn rejects_nonpositive_length() {
        assert!(Grid::new(2, &[8, 8], &[1.0, 0.0]).is_err());
        assert!(Grid::new(2, &[8, 8], &[1.0, -2.0]).is_err());
    }

    #[test]
    fn wavenumber_range() {
        let g = Grid::new(2, &[8, 8], &[2.0, 2.0]).unwrap();
        let k = g.waves(0);
        let scale = std::f64::consts::PI; // 2π/L with L = 2
        assert_eq!(k[0], 0.0);
        assert_eq!(k[1], scale);
        assert_eq!(k[4], -4.0 * scale); // the -N/2 mode
        assert_eq!(k[7], -scale);
    }

    #[test]
    fn laplacian_symbol_single_modes() {
        let l = 2.5;
        let g = Grid::new(2, &[8, 8], &[l, l]).unwrap();
        let k1 = 2.0 * std::f64::consts::PI / l;

        let sym = laplacian_symbol(&g, 1.0).unwrap();
        assert_eq!(sym[[0, 0]], 0.0);
        assert!((sym[[1, 0]] - k1 * k1).abs() < 1e-14);

        let sym2 = laplacian_symbol(&g, 2.0).unwrap();
        assert!((sym2[[0, 1]] - 2.0 * k1 * k1).abs() < 1e-14);
        assert!(sym2.iter().all(|&s| s >= 0.0));
    }

    #[test]
    fn laplacian_symbol_rejects_nonpositive_gamma() {
        let g = Grid::new(2, &[8, 8], &[1.0, 1.0]).unwrap();
        assert!(laplacian_symbol(&g, 0.0).is_err());
        assert!(laplacian_symbol(&g, -1.0).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(PhysicsParams::new(1.0, 1.0, 0.0, 1.0).is_ok());
        assert!(PhysicsParams::new(0.0, 1.0, 0.0, 1.0).is_err());
        assert!(PhysicsParams::new(1.0, -1.0, 0.0, 1.0).is_err());
        let p = PhysicsParams::new(1.0, 1.0, -3.9, 1.0).unwrap();
        assert!(p.require_bound_state_admissible().is_ok());
        let p = PhysicsParams::new(1.0, 1.0, -4.0, 1.0).unwrap();
        assert!(p.require_bound_state_admissible().is_err());
        let p = PhysicsParams::new(1.0, 1.0, 0.0, -1.0).unwrap();
        assert!(p.require_bound_state_admissible().is_err());
    }
}
