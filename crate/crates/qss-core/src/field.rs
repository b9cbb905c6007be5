//! The complex state `(u, v)` and its Fourier image.

use ndarray::{ArrayD, IxDyn};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;

/// The pair `(u, v)` sampled on a [`Grid`]; row-major, last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPair {
    pub u: ArrayD<Complex64>,
    pub v: ArrayD<Complex64>,
}

impl FieldPair {
    pub fn zeros(grid: &Grid) -> Self {
        let shape = IxDyn(grid.shape());
        Self {
            u: ArrayD::zeros(shape.clone()),
            v: ArrayD::zeros(shape),
        }
    }

    pub fn from_arrays(u: ArrayD<Complex64>, v: ArrayD<Complex64>) -> Result<Self> {
        if u.shape() != v.shape() {
            return Err(Error::Shape {
                expected: u.shape().to_vec(),
                got: v.shape().to_vec(),
            });
        }
        Ok(Self { u, v })
    }

    pub fn shape(&self) -> &[usize] {
        self.u.shape()
    }

    pub fn check_grid(&self, grid: &Grid) -> Result<()> {
        if self.u.shape() != grid.shape() || self.v.shape() != grid.shape() {
            return Err(Error::Shape {
                expected: grid.shape().to_vec(),
                got: self.u.shape().to_vec(),
            });
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().all(|c| c.re.is_finite() && c.im.is_finite())
            && self.v.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Largest pointwise modulus over both components.
    pub fn sup_norm(&self) -> f64 {
        let m = |a: &ArrayD<Complex64>| a.iter().map(|c| c.norm_sqr()).fold(0.0, f64::max);
        m(&self.u).max(m(&self.v)).sqrt()
    }
}

/// Fourier coefficients of a [`FieldPair`], unitary normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumPair {
    pub u_hat: ArrayD<Complex64>,
    pub v_hat: ArrayD<Complex64>,
}

impl SpectrumPair {
    pub fn shape(&self) -> &[usize] {
        self.u_hat.shape()
    }

    pub fn check_grid(&self, grid: &Grid) -> Result<()> {
        if self.u_hat.shape() != grid.shape() || self.v_hat.shape() != grid.shape() {
            return Err(Error::Shape {
                expected: grid.shape().to_vec(),
                got: self.u_hat.shape().to_vec(),
            });
        }
        Ok(())
    }
}
