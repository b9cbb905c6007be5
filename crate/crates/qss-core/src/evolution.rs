//! Strang split-step time integration.
//!
//! The linear flow is exact in Fourier space: `û` advances by
//! `e^{-i|k|²_{γ1} dt}` and `v̂` by `e^{-i(|k|²_{γ2}+β) dt/2}` (the factor ½
//! comes from the `2i` time derivative of the second component). The
//! nonlinear part is the pointwise ODE `u' = i ū v`, `v' = (i/4) u²`,
//! advanced by one classical RK4 stage per grid point; it conserves the
//! pointwise density `|u|² + 4|v|²` to local order `dt⁵`.
//!
//! `evolve` realizes the maximal-solution contract: it either reaches
//! `t_end` or stops with a blow-up diagnosis (gradient-norm growth past
//! `blowup_factor`, or nonfinite values), or reports time-step underflow.

use ndarray::ArrayD;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldPair, SpectrumPair};
use crate::grid::{Grid, PhysicsParams};
use crate::observables::{ObservableContext, ObservableRecord};
use crate::transform::{forward_in_place, forward_transform, inverse_in_place, inverse_transform};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    /// Fixed step when `cfl_const = 0`, otherwise the very first step.
    pub dt0: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub t_end: f64,
    /// Adaptive law `dt = cfl_const / max(‖u‖_∞, ‖v‖_∞, 1)`; `0` disables
    /// adaptivity and the run uses `dt0` throughout.
    pub cfl_const: f64,
    /// Blow-up fires when `‖∇u‖² + ‖∇v‖²` exceeds this multiple of its
    /// initial value.
    pub blowup_factor: f64,
    /// Observables are sampled every this many steps.
    pub record_every: usize,
    /// 2/3-rule spectral truncation after each nonlinear substep.
    pub dealias: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt0: 1e-3,
            dt_min: 1e-7,
            dt_max: 1e-1,
            t_end: 1.0,
            cfl_const: 0.0,
            blowup_factor: 1e3,
            record_every: 20,
            dealias: false,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_min > 0.0 && self.dt_min <= self.dt0 && self.dt0 <= self.dt_max) {
            return Err(Error::Params(format!(
                "need 0 < dt_min <= dt0 <= dt_max, got ({}, {}, {})",
                self.dt_min, self.dt0, self.dt_max
            )));
        }
        if !(self.t_end > 0.0) {
            return Err(Error::Params(format!("t_end must be positive, got {}", self.t_end)));
        }
        if !(self.blowup_factor > 1.0) {
            return Err(Error::Params(format!(
                "blowup_factor must exceed 1, got {}",
                self.blowup_factor
            )));
        }
        if self.record_every == 0 {
            return Err(Error::Params("record_every must be at least 1".into()));
        }
        if self.cfl_const < 0.0 {
            return Err(Error::Params(format!(
                "cfl_const must be nonnegative, got {}",
                self.cfl_const
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    BlowupDetected,
    DtUnderflow,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub status: RunStatus,
    pub blowup_time_estimate: Option<f64>,
    pub series: Vec<ObservableRecord>,
    pub final_state: FieldPair,
    pub final_time: f64,
    pub steps: usize,
}

/// Exact linear propagation in Fourier space; `dt` may be negative.
pub fn linear_step(
    spec: &SpectrumPair,
    grid: &Grid,
    params: &PhysicsParams,
    dt: f64,
) -> Result<SpectrumPair> {
    spec.check_grid(grid)?;
    let kernel = LinearKernel::new(grid, params);
    let mut out = spec.clone();
    kernel.apply(&mut out.u_hat, &mut out.v_hat, dt);
    Ok(out)
}

/// One RK4 stage of the pointwise nonlinear ODE at every grid point.
pub fn nonlinear_step(fields: &FieldPair, dt: f64) -> Result<FieldPair> {
    let mut out = fields.clone();
    nonlinear_in_place(&mut out, dt)?;
    Ok(out)
}

/// One Strang step: half linear, full nonlinear, half linear.
pub fn strang_step(
    fields: &FieldPair,
    grid: &Grid,
    params: &PhysicsParams,
    dt: f64,
) -> Result<FieldPair> {
    fields.check_grid(grid)?;
    let mut spec = forward_transform(fields, grid)?;
    let kernel = LinearKernel::new(grid, params);
    kernel.apply(&mut spec.u_hat, &mut spec.v_hat, 0.5 * dt);
    let mut state = inverse_transform(&spec, grid)?;
    nonlinear_in_place(&mut state, dt)?;
    let mut spec = forward_transform(&state, grid)?;
    kernel.apply(&mut spec.u_hat, &mut spec.v_hat, 0.5 * dt);
    inverse_transform(&spec, grid)
}

/// Integrate from `fields0` until `t_end` or a termination event.
pub fn evolve(
    fields0: &FieldPair,
    grid: &Grid,
    params: &PhysicsParams,
    config: &IntegratorConfig,
) -> Result<RunResult> {
    evolve_with(fields0, grid, params, config, |_, _, _| {})
}

/// [`evolve`] with a callback invoked at every recorded sample (including
/// the initial and final states); used for strided snapshot emission and
/// online diagnostics.
pub fn evolve_with(
    fields0: &FieldPair,
    grid: &Grid,
    params: &PhysicsParams,
    config: &IntegratorConfig,
    mut on_record: impl FnMut(usize, &FieldPair, &ObservableRecord),
) -> Result<RunResult> {
    config.validate()?;
    fields0.check_grid(grid)?;
    if !fields0.is_finite() {
        return Err(Error::Params("initial state has nonfinite entries".into()));
    }

    let ctx = ObservableContext::new(grid, params)?;
    let kernel = LinearKernel::new(grid, params);
    let sym_plain = grid.weighted_wave_sq(&vec![1.0; grid.spatial_dim()]);
    let dealias_mask = config.dealias.then(|| two_thirds_mask(grid));

    let mut state = fields0.clone();
    let mut backup = fields0.clone();
    let mut series = Vec::new();
    let mut t = 0.0;
    let mut steps = 0usize;
    let rec0 = ctx.record(&state, t);
    on_record(0, &state, &rec0);
    series.push(rec0);

    let grad0 = {
        let spec = forward_transform(&state, grid)?;
        spectral_grad_sq(&spec, &sym_plain, grid)
    };
    let threshold = config.blowup_factor * grad0.max(f64::MIN_POSITIVE);

    let status;
    let mut blowup_time = None;

    loop {
        if t >= config.t_end - 1e-12 * config.t_end {
            status = RunStatus::Completed;
            break;
        }

        let dt = if config.cfl_const > 0.0 {
            let amp = state.sup_norm().max(1.0);
            let raw = config.cfl_const / amp;
            if raw < config.dt_min {
                status = RunStatus::DtUnderflow;
                break;
            }
            raw.min(config.dt_max)
        } else {
            config.dt0
        };
        let dt = dt.min(config.t_end - t);

        backup.u.clone_from(&state.u);
        backup.v.clone_from(&state.v);

        match step_once(&mut state, grid, &kernel, &sym_plain, dealias_mask.as_ref(), dt) {
            Ok(grad_sq) => {
                t += dt;
                steps += 1;
                if !grad_sq.is_finite() || grad_sq > threshold {
                    blowup_time = Some(t);
                    status = RunStatus::BlowupDetected;
                    if !state.is_finite() {
                        state = backup;
                    } else {
                        let rec = ctx.record(&state, t);
                        on_record(series.len(), &state, &rec);
                        series.push(rec);
                    }
                    break;
                }
                if steps % config.record_every == 0 {
                    let rec = ctx.record(&state, t);
                    on_record(series.len(), &state, &rec);
                    series.push(rec);
                }
            }
            Err(Error::Overflow) => {
                blowup_time = Some(t);
                status = RunStatus::BlowupDetected;
                state = backup;
                break;
            }
            Err(e) => return Err(e),
        }
    }

    if status == RunStatus::Completed && series.last().map(|r| r.t) != Some(t) {
        let rec = ctx.record(&state, t);
        on_record(series.len(), &state, &rec);
        series.push(rec);
    }

    Ok(RunResult {
        status,
        blowup_time_estimate: blowup_time,
        series,
        final_state: state,
        final_time: t,
        steps,
    })
}

/// Cached multipliers of the linear flow for unit time; applying for a step
/// `dt` exponentiates the stored symbols on the fly.
struct LinearKernel {
    sym_u: ArrayD<f64>,
    sym_v: ArrayD<f64>,
}

impl LinearKernel {
    fn new(grid: &Grid, params: &PhysicsParams) -> Self {
        let n = grid.spatial_dim();
        let mut w1 = vec![1.0; n];
        *w1.last_mut().unwrap() = params.gamma1;
        let mut w2 = vec![1.0; n];
        *w2.last_mut().unwrap() = params.gamma2;
        let sym_u = grid.weighted_wave_sq(&w1);
        let mut sym_v = grid.weighted_wave_sq(&w2);
        sym_v.mapv_inplace(|s| 0.5 * (s + params.beta));
        Self { sym_u, sym_v }
    }

    fn apply(&self, u_hat: &mut ArrayD<Complex64>, v_hat: &mut ArrayD<Complex64>, dt: f64) {
        for (c, &s) in u_hat.iter_mut().zip(self.sym_u.iter()) {
            *c *= Complex64::from_polar(1.0, -s * dt);
        }
        for (c, &s) in v_hat.iter_mut().zip(self.sym_v.iter()) {
            *c *= Complex64::from_polar(1.0, -s * dt);
        }
    }
}

fn nonlinear_in_place(state: &mut FieldPair, dt: f64) -> Result<()> {
    let u = state.u.as_slice_memory_order_mut().expect("contiguous");
    let v = state.v.as_slice_memory_order_mut().expect("contiguous");
    let mut finite = true;
    for (u, v) in u.iter_mut().zip(v.iter_mut()) {
        let (un, vn) = rk4_point(*u, *v, dt);
        finite &= un.re.is_finite() && un.im.is_finite() && vn.re.is_finite() && vn.im.is_finite();
        *u = un;
        *v = vn;
    }
    if finite {
        Ok(())
    } else {
        Err(Error::Overflow)
    }
}

#[inline]
fn rhs(u: Complex64, v: Complex64) -> (Complex64, Complex64) {
    let i = Complex64::new(0.0, 1.0);
    (i * u.conj() * v, i * 0.25 * u * u)
}

#[inline]
fn rk4_point(u: Complex64, v: Complex64, dt: f64) -> (Complex64, Complex64) {
    let (k1u, k1v) = rhs(u, v);
    let (k2u, k2v) = rhs(u + 0.5 * dt * k1u, v + 0.5 * dt * k1v);
    let (k3u, k3v) = rhs(u + 0.5 * dt * k2u, v + 0.5 * dt * k2v);
    let (k4u, k4v) = rhs(u + dt * k3u, v + dt * k3v);
    let w = dt / 6.0;
    (
        u + w * (k1u + 2.0 * k2u + 2.0 * k3u + k4u),
        v + w * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
    )
}

/// One in-place Strang step returning `‖∇u‖² + ‖∇v‖²` (plain gradients),
/// evaluated for free in the trailing spectral phase.
fn step_once(
    state: &mut FieldPair,
    grid: &Grid,
    kernel: &LinearKernel,
    sym_plain: &ArrayD<f64>,
    dealias: Option<&ArrayD<f64>>,
    dt: f64,
) -> Result<f64> {
    forward_in_place(&mut state.u);
    forward_in_place(&mut state.v);
    kernel.apply(&mut state.u, &mut state.v, 0.5 * dt);
    inverse_in_place(&mut state.u);
    inverse_in_place(&mut state.v);

    nonlinear_in_place(state, dt)?;

    forward_in_place(&mut state.u);
    forward_in_place(&mut state.v);
    if let Some(mask) = dealias {
        for (c, &m) in state.u.iter_mut().zip(mask.iter()) {
            *c *= m;
        }
        for (c, &m) in state.v.iter_mut().zip(mask.iter()) {
            *c *= m;
        }
    }
    let mut grad_sq = 0.0;
    for (c, &s) in state.u.iter().zip(sym_plain.iter()) {
        grad_sq += s * c.norm_sqr();
    }
    for (c, &s) in state.v.iter().zip(sym_plain.iter()) {
        grad_sq += s * c.norm_sqr();
    }
    grad_sq *= grid.cell_volume();

    kernel.apply(&mut state.u, &mut state.v, 0.5 * dt);
    inverse_in_place(&mut state.u);
    inverse_in_place(&mut state.v);
    Ok(grad_sq)
}

fn spectral_grad_sq(spec: &SpectrumPair, sym_plain: &ArrayD<f64>, grid: &Grid) -> f64 {
    let mut acc = 0.0;
    for (c, &s) in spec.u_hat.iter().zip(sym_plain.iter()) {
        acc += s * c.norm_sqr();
    }
    for (c, &s) in spec.v_hat.iter().zip(sym_plain.iter()) {
        acc += s * c.norm_sqr();
    }
    acc * grid.cell_volume()
}

/// 2/3-rule mask: modes with `|m_j| > N_j/3` on any axis are dropped.
fn two_thirds_mask(grid: &Grid) -> ArrayD<f64> {
    let points = grid.points().to_vec();
    ArrayD::from_shape_fn(ndarray::IxDyn(&points), |idx| {
        for (j, &n) in points.iter().enumerate() {
            let i = idx[j];
            let m = if i < n / 2 { i as i64 } else { i as i64 - n as i64 };
            if m.unsigned_abs() as usize > n / 3 {
                return 0.0;
            }
        }
        1.0
    })
}
