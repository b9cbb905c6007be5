//! Shared helpers for the integration suites.

#![allow(dead_code)]

use ndarray::{ArrayD, IxDyn};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;

use qss_core::field::FieldPair;
use qss_core::grid::Grid;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Sample an analytic function of the coordinates on the grid.
pub fn sample_fn(grid: &Grid, f: impl Fn(&[f64]) -> Complex64) -> ArrayD<Complex64> {
    let n = grid.spatial_dim();
    let mut x = vec![0.0; n];
    ArrayD::from_shape_fn(IxDyn(grid.shape()), |idx| {
        for j in 0..n {
            x[j] = grid.coords(j)[idx[j]];
        }
        f(&x)
    })
}

/// Real Gaussian mixture, analytic: `Σ a_i exp(-|x - c_i|²/(2 s_i²))`.
#[derive(Clone, Debug)]
pub struct GaussianMixture {
    pub terms: Vec<(f64, Vec<f64>, f64)>, // (amplitude, center, width)
}

impl GaussianMixture {
    pub fn random(rng: &mut impl Rng, n: usize, n_terms: usize, positive: bool) -> Self {
        let terms = (0..n_terms)
            .map(|_| {
                let a = if positive {
                    0.3 + 0.7 * rng.random::<f64>()
                } else {
                    rng.random::<f64>() - 0.35
                };
                let c: Vec<f64> = (0..n).map(|_| 4.0 * (rng.random::<f64>() - 0.5)).collect();
                let s = 0.8 + 0.7 * rng.random::<f64>();
                (a, c, s)
            })
            .collect();
        Self { terms }
    }

    /// Evaluate at `ζ·x` (so `zeta = 1` is the plain profile).
    pub fn eval_scaled(&self, x: &[f64], zeta: f64) -> f64 {
        self.terms
            .iter()
            .map(|(a, c, s)| {
                let r2: f64 = x
                    .iter()
                    .zip(c)
                    .map(|(&xi, &ci)| (zeta * xi - ci) * (zeta * xi - ci))
                    .sum();
                a * (-r2 / (2.0 * s * s)).exp()
            })
            .sum()
    }

    pub fn sample(&self, grid: &Grid, zeta: f64, amplitude: f64) -> ArrayD<Complex64> {
        sample_fn(grid, |x| {
            Complex64::new(amplitude * self.eval_scaled(x, zeta), 0.0)
        })
    }
}

/// Random smooth decaying complex pair built from Gaussian mixtures with a
/// small imaginary part; `J > 0` is enforced through a positive `v`.
pub fn random_localized_pair(grid: &Grid, rng: &mut impl Rng) -> FieldPair {
    let n = grid.spatial_dim();
    let mu_re = GaussianMixture::random(rng, n, 3, false);
    let mu_im = GaussianMixture::random(rng, n, 2, false);
    let mv = GaussianMixture::random(rng, n, 3, true);
    let u = sample_fn(grid, |x| {
        Complex64::new(mu_re.eval_scaled(x, 1.0), 0.3 * mu_im.eval_scaled(x, 1.0))
    });
    let v = mv.sample(grid, 1.0, 1.0);
    FieldPair { u, v }
}

/// 4th-order centered finite-difference derivative along `axis`, periodic.
pub fn fd_gradient(field: &ArrayD<Complex64>, grid: &Grid, axis: usize) -> ArrayD<Complex64> {
    let n = grid.points()[axis];
    let h = grid.spacing(axis);
    let shape = grid.shape().to_vec();
    ArrayD::from_shape_fn(IxDyn(&shape), |idx| {
        let at = |offset: i64| {
            let mut src: Vec<usize> = (0..shape.len()).map(|j| idx[j]).collect();
            src[axis] = ((idx[axis] as i64 + offset).rem_euclid(n as i64)) as usize;
            field[IxDyn(&src)]
        };
        (8.0 * (at(1) - at(-1)) - (at(2) - at(-2))) / (12.0 * h)
    })
}

pub fn assert_rel(actual: f64, expected: f64, tol: f64, what: &str) {
    let scale = expected.abs().max(1e-300);
    let rel = (actual - expected).abs() / scale;
    assert!(
        rel <= tol,
        "{what}: actual {actual:.12e}, expected {expected:.12e}, rel err {rel:.3e} > {tol:.1e}"
    );
}
