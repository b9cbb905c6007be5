//! Forward/inverse spectral transforms and spectral calculus helpers.
//!
//! Transforms are unitary (each direction scales by `1/√N_total`), so
//! Parseval reads `Σ|û|² · dV = ∫|u|²` with the rectangle-rule cell volume
//! `dV`. All sweeps are separable 1-D FFTs along each axis; plans are cached
//! per length in a thread-local planner.

use std::cell::RefCell;
use std::sync::Arc;

use ndarray::{ArrayD, Axis, IxDyn};
use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::Result;
use crate::field::{FieldPair, SpectrumPair};
use crate::grid::Grid;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft(len, direction))
}

/// In-place multi-dimensional FFT sweep, one axis at a time, then a single
/// unitary rescale. The array must be in standard (row-major) layout.
fn transform_in_place(data: &mut ArrayD<Complex64>, direction: FftDirection) {
    let ndim = data.ndim();
    let shape: Vec<usize> = data.shape().to_vec();
    let total: usize = shape.iter().product();

    // Last axis: lanes are contiguous, rustfft processes them back to back.
    let last_len = shape[ndim - 1];
    if last_len > 1 {
        let fft = plan(last_len, direction);
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        let slice = data
            .as_slice_memory_order_mut()
            .expect("field arrays are contiguous");
        fft.process_with_scratch(slice, &mut scratch);
    }

    // Remaining axes: gather each lane into a small buffer.
    for ax in 0..ndim - 1 {
        let len = shape[ax];
        if len <= 1 {
            continue;
        }
        let fft = plan(len, direction);
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        let mut buf = vec![Complex64::default(); len];
        for mut lane in data.lanes_mut(Axis(ax)) {
            for (b, x) in buf.iter_mut().zip(lane.iter()) {
                *b = *x;
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for (x, b) in lane.iter_mut().zip(buf.iter()) {
                *x = *b;
            }
        }
    }

    let scale = Complex64::new(1.0 / (total as f64).sqrt(), 0.0);
    data.mapv_inplace(|c| c * scale);
}

/// Unitary forward transform of a single array.
pub fn forward_array(field: &ArrayD<Complex64>, grid: &Grid) -> ArrayD<Complex64> {
    debug_assert_eq!(field.shape(), grid.shape());
    let mut out = field.to_owned();
    transform_in_place(&mut out, FftDirection::Forward);
    out
}

/// Unitary inverse transform of a single array.
pub fn inverse_array(spec: &ArrayD<Complex64>, grid: &Grid) -> ArrayD<Complex64> {
    debug_assert_eq!(spec.shape(), grid.shape());
    let mut out = spec.to_owned();
    transform_in_place(&mut out, FftDirection::Inverse);
    out
}

pub fn forward_transform(fields: &FieldPair, grid: &Grid) -> Result<SpectrumPair> {
    fields.check_grid(grid)?;
    Ok(SpectrumPair {
        u_hat: forward_array(&fields.u, grid),
        v_hat: forward_array(&fields.v, grid),
    })
}

pub fn inverse_transform(spec: &SpectrumPair, grid: &Grid) -> Result<FieldPair> {
    spec.check_grid(grid)?;
    Ok(FieldPair {
        u: inverse_array(&spec.u_hat, grid),
        v: inverse_array(&spec.v_hat, grid),
    })
}

/// In-place variants used by the time stepper to avoid reallocation.
pub fn forward_in_place(data: &mut ArrayD<Complex64>) {
    transform_in_place(data, FftDirection::Forward);
}

pub fn inverse_in_place(data: &mut ArrayD<Complex64>) {
    transform_in_place(data, FftDirection::Inverse);
}

/// Pointwise partial derivative along `axis` from spectral coefficients.
///
/// The Nyquist mode has no conjugate partner, so it is dropped from odd-order
/// derivatives to keep derivatives of real fields real.
pub fn gradient_component(spec: &ArrayD<Complex64>, grid: &Grid, axis: usize) -> ArrayD<Complex64> {
    let waves = grid.waves(axis);
    let n = grid.points()[axis];
    let mut out = spec.clone();
    for (idx, c) in out.indexed_iter_mut() {
        let i = idx[axis];
        let k = if i == n / 2 { 0.0 } else { waves[i] };
        *c *= Complex64::new(0.0, k);
    }
    transform_in_place(&mut out, FftDirection::Inverse);
    out
}

/// Spectral mass `Σ|û|² dV`; equals `∫|u|²` by Parseval.
pub fn spectral_mass(spec: &ArrayD<Complex64>, grid: &Grid) -> f64 {
    spec.iter().map(|c| c.norm_sqr()).sum::<f64>() * grid.cell_volume()
}

/// Quadratic spectral functional `Σ s(k) |û_k|² dV`.
pub fn spectral_quadratic(spec: &ArrayD<Complex64>, symbol: &ArrayD<f64>, grid: &Grid) -> f64 {
    debug_assert_eq!(spec.shape(), symbol.shape());
    spec.iter()
        .zip(symbol.iter())
        .map(|(c, &s)| s * c.norm_sqr())
        .sum::<f64>()
        * grid.cell_volume()
}

/// Translate a field by a fractional shift `y` (same length units as the
/// box): multiplies `û_k` by `e^{i k·y}`, i.e. `out(x) = in(x + y)`.
pub fn fractional_shift(field: &ArrayD<Complex64>, grid: &Grid, shift: &[f64]) -> ArrayD<Complex64> {
    assert_eq!(shift.len(), grid.spatial_dim());
    let mut spec = forward_array(field, grid);
    for (idx, c) in spec.indexed_iter_mut() {
        let mut phase = 0.0;
        for (j, &s) in shift.iter().enumerate() {
            phase += grid.waves(j)[idx[j]] * s;
        }
        *c *= Complex64::from_polar(1.0, phase);
    }
    transform_in_place(&mut spec, FftDirection::Inverse);
    spec
}

/// Evaluate the trigonometric interpolant of `field` at the scaled points
/// `ζ·x`, i.e. return samples of `x ↦ field(ζ x)`. Exact for `ζ = 1`; for
/// `ζ ≠ 1` points outside the box read the periodic extension.
pub fn evaluate_scaled(field: &ArrayD<Complex64>, grid: &Grid, zeta: f64) -> ArrayD<Complex64> {
    let spec = forward_array(field, grid);
    let n_axes = grid.spatial_dim();
    let mut data = spec;
    // Per-axis evaluation matrix E[i, m] = e^{i k_m (ζ x_i + L/2)} / √N_j;
    // the L/2 offset maps the centered coordinate back to index space, where
    // the interpolant of the samples is the plain inverse DFT.
    for ax in 0..n_axes {
        let n = grid.points()[ax];
        let waves = grid.waves(ax);
        let coords = grid.coords(ax);
        let half = grid.lengths()[ax] / 2.0;
        let inv_sqrt = 1.0 / (n as f64).sqrt();
        let mut matrix = vec![Complex64::default(); n * n];
        for i in 0..n {
            for m in 0..n {
                matrix[i * n + m] =
                    Complex64::from_polar(inv_sqrt, waves[m] * (zeta * coords[i] + half));
            }
        }
        let mut out = ArrayD::<Complex64>::zeros(IxDyn(data.shape()));
        for (lane_in, mut lane_out) in data.lanes(Axis(ax)).into_iter().zip(out.lanes_mut(Axis(ax)))
        {
            for i in 0..n {
                let mut acc = Complex64::default();
                for m in 0..n {
                    acc += matrix[i * n + m] * lane_in[m];
                }
                lane_out[i] = acc;
            }
        }
        data = out;
    }
    data
}
