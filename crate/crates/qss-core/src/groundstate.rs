//! Bound/ground states `(P, Q)` of the stationary system
//!
//! ```text
//!   -ω P + Δ_{γ1} P + P̄ Q = 0
//!   -(4ω + β) Q + Δ_{γ2} Q + ½ P² = 0
//! ```
//!
//! computed by a stabilized spectral fixed point. The stabilizer is the
//! single scalar `S = I/(3/2 J)`, which equals one exactly at solutions
//! (multiply the two equations by `P` and `Q` and integrate). The plain
//! stabilized map has a neutrally oscillating amplitude mode for this
//! coupled quadratic system (the two component amplitudes against one shared
//! scalar), so the update is under-relaxed; the default mixing ½ turns the
//! oscillation into one-step decay and leaves every fixed-point identity
//! intact.

use ndarray::ArrayD;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldPair;
use crate::grid::{Grid, PhysicsParams};
use crate::observables::{interaction, kj_functionals, mass};
use crate::preset::{sample_preset, Preset};
use crate::transform::{
    forward_array, evaluate_scaled, fractional_shift, inverse_array, spectral_quadratic,
};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct PetviashviliConfig {
    pub max_iter: usize,
    /// Relative residual target for the stationary system.
    pub tol: f64,
    /// Stabilizer power; 2 is the classical choice for a quadratic
    /// nonlinearity.
    pub stab_exponent: f64,
    /// Fixed-point mixing; 1 recovers the raw update.
    pub relaxation: f64,
    pub init: Preset,
}

impl Default for PetviashviliConfig {
    fn default() -> Self {
        Self {
            max_iter: 500,
            tol: 1e-10,
            stab_exponent: 2.0,
            relaxation: 0.5,
            init: Preset::Gaussian {
                amp_u: 3.0,
                amp_v: 3.0,
                sigma: 1.5,
            },
        }
    }
}

impl PetviashviliConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::Params("max_iter must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Params(format!("tol must be positive, got {}", self.tol)));
        }
        if !(self.relaxation > 0.0 && self.relaxation <= 1.0) {
            return Err(Error::Params(format!(
                "relaxation must lie in (0, 1], got {}",
                self.relaxation
            )));
        }
        Ok(())
    }
}

/// Stationary-solution diagnostics: `K/J`, `I/J` and `E/K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PohozaevRatios {
    pub k_over_j: f64,
    pub i_over_j: f64,
    pub e_over_k: f64,
}

#[derive(Debug, Clone)]
pub struct GroundStateResult {
    pub fields: FieldPair,
    pub residual: f64,
    pub residual_history: Vec<f64>,
    pub iterations: usize,
    /// Final stabilizer value; 1 at an exact fixed point.
    pub stabilizer: f64,
    pub ratios: PohozaevRatios,
    /// `min(min P, min Q)` over the grid (real parts).
    pub positivity_min: f64,
    /// Largest imaginary part relative to the sup-norm.
    pub imaginary_fraction: f64,
}

/// Relative L² residual of the stationary system; `+∞` for the zero state.
pub fn stationary_residual(fields: &FieldPair, grid: &Grid, params: &PhysicsParams) -> f64 {
    let (den1, den2) = denominators(grid, params);
    let p_hat = forward_array(&fields.u, grid);
    let q_hat = forward_array(&fields.v, grid);
    let n1 = forward_array(&nonlinear_u(fields), grid);
    let n2 = forward_array(&nonlinear_v(fields), grid);
    residual_from_parts(&p_hat, &q_hat, &n1, &n2, &den1, &den2)
}

/// Petviashvili-type stabilized fixed-point iteration for the ground state.
pub fn petviashvili_solve(
    grid: &Grid,
    params: &PhysicsParams,
    config: &PetviashviliConfig,
) -> Result<GroundStateResult> {
    config.validate()?;
    params.require_bound_state_admissible()?;

    let (den1, den2) = denominators(grid, params);
    let mut fields = sample_preset(grid, &config.init)?;
    let mut p_hat = forward_array(&fields.u, grid);
    let mut q_hat = forward_array(&fields.v, grid);

    let n = grid.spatial_dim();
    let mut w1 = vec![1.0; n];
    *w1.last_mut().unwrap() = params.gamma1;
    let mut w2 = vec![1.0; n];
    *w2.last_mut().unwrap() = params.gamma2;
    let sym1 = grid.weighted_wave_sq(&w1);
    let sym2 = grid.weighted_wave_sq(&w2);

    let mut history = Vec::new();
    let mut stabilizer = f64::NAN;
    let theta = config.relaxation;

    for it in 0..config.max_iter {
        let n1 = forward_array(&nonlinear_u(&fields), grid);
        let n2 = forward_array(&nonlinear_v(&fields), grid);

        let res = residual_from_parts(&p_hat, &q_hat, &n1, &n2, &den1, &den2);
        history.push(res);
        if res <= config.tol {
            return Ok(finish(fields, grid, params, history, it, stabilizer));
        }

        // S = I / ((3/2) J) with I = K + ωM.
        let dv = grid.cell_volume();
        let grad_p = spectral_quadratic(&p_hat, &sym1, grid);
        let grad_q = spectral_quadratic(&q_hat, &sym2, grid);
        let q_sq: f64 = fields.v.iter().map(|c| c.norm_sqr()).sum::<f64>() * dv;
        let m = mass(&fields, grid);
        let j = interaction(&fields, grid);
        if !(j.abs() > 0.0) || !j.is_finite() {
            return Err(Error::Search(
                "stabilizer undefined: J vanished during iteration".into(),
            ));
        }
        let k = grad_p + grad_q + params.beta * q_sq;
        stabilizer = (k + params.omega * m) / (1.5 * j);
        let s_pow = stabilizer.powf(config.stab_exponent);

        for (((p, n1), d1), s) in p_hat
            .iter_mut()
            .zip(n1.iter())
            .zip(den1.iter())
            .zip(std::iter::repeat(s_pow))
        {
            *p = (1.0 - theta) * *p + theta * s * n1 / d1;
        }
        for (((q, n2), d2), s) in q_hat
            .iter_mut()
            .zip(n2.iter())
            .zip(den2.iter())
            .zip(std::iter::repeat(s_pow))
        {
            *q = (1.0 - theta) * *q + theta * s * n2 / d2;
        }
        fields.u = inverse_array(&p_hat, grid);
        fields.v = inverse_array(&q_hat, grid);
        if !fields.is_finite() {
            return Err(Error::NotConverged {
                iterations: it + 1,
                residual: f64::INFINITY,
                history,
            });
        }
    }

    let residual = *history.last().unwrap_or(&f64::INFINITY);
    Err(Error::NotConverged {
        iterations: config.max_iter,
        residual,
        history,
    })
}

/// Diagnostic ratios of a converged state together with the values forced by
/// the scaling identities of the stationary system, `K/J = (d+1)/4` and
/// `E/K = (d-3)/(2d+2)` (for `β = 0`), and `I/J = 3/2` (any `β`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PohozaevCheck {
    pub measured: PohozaevRatios,
    pub expected_k_over_j: f64,
    pub expected_i_over_j: f64,
    pub expected_e_over_k: f64,
    pub tolerance: f64,
    pub ok: bool,
}

pub fn pohozaev_check(result: &GroundStateResult, d: usize) -> PohozaevCheck {
    let expected_k_over_j = (d as f64 + 1.0) / 4.0;
    let expected_e_over_k = (d as f64 - 3.0) / (2.0 * d as f64 + 2.0);
    let tolerance = if d <= 2 { 1e-6 } else { 1e-3 };
    let m = result.ratios;
    let ok = (m.k_over_j - expected_k_over_j).abs() <= tolerance * expected_k_over_j.abs()
        && (m.i_over_j - 1.5).abs() <= 1e-8
        && (m.e_over_k - expected_e_over_k).abs() <= tolerance.max(1e-6);
    PohozaevCheck {
        measured: m,
        expected_k_over_j,
        expected_i_over_j: 1.5,
        expected_e_over_k,
        tolerance,
        ok,
    }
}

/// Amplitude/scale map `Z = ν W(ζ·)` hitting prescribed `(J*, M*)`; leaves
/// the GN quotient unchanged.
#[derive(Debug, Clone)]
pub struct RescaledPair {
    pub fields: FieldPair,
    pub nu: f64,
    pub zeta: f64,
}

pub fn lemma1_rescale(
    fields: &FieldPair,
    grid: &Grid,
    j_target: f64,
    m_target: f64,
) -> Result<RescaledPair> {
    let j = interaction(fields, grid);
    let m = mass(fields, grid);
    if !(j > 0.0) {
        return Err(Error::UndefinedQuotient(format!(
            "rescale needs J > 0, got {j:.6e}"
        )));
    }
    if !(j_target > 0.0 && m_target > 0.0) {
        return Err(Error::Params(format!(
            "targets must be positive, got J* = {j_target}, M* = {m_target}"
        )));
    }
    let nu = (j_target * m) / (j * m_target);
    let zeta = (nu * nu * m / m_target).powf(1.0 / grid.spatial_dim() as f64);
    let scale = Complex64::new(nu, 0.0);
    let u = evaluate_scaled(&fields.u, grid, zeta).mapv(|c| c * scale);
    let v = evaluate_scaled(&fields.v, grid, zeta).mapv(|c| c * scale);
    Ok(RescaledPair {
        fields: FieldPair { u, v },
        nu,
        zeta,
    })
}

/// Orbit action `(e^{iθ} u(·+y), e^{2iθ} v(·+y))` with integer cell shifts.
pub fn apply_orbit(fields: &FieldPair, grid: &Grid, theta: f64, shift_cells: &[i64]) -> FieldPair {
    assert_eq!(shift_cells.len(), grid.spatial_dim());
    let e1 = Complex64::from_polar(1.0, theta);
    let e2 = Complex64::from_polar(1.0, 2.0 * theta);
    let roll = |a: &ArrayD<Complex64>, phase: Complex64| {
        let shape = grid.shape().to_vec();
        ArrayD::from_shape_fn(ndarray::IxDyn(&shape), |idx| {
            let mut src = Vec::with_capacity(shape.len());
            for (j, &n) in shape.iter().enumerate() {
                let s = shift_cells[j].rem_euclid(n as i64) as usize;
                src.push((idx[j] + s) % n);
            }
            phase * a[ndarray::IxDyn(&src)]
        })
    };
    FieldPair {
        u: roll(&fields.u, e1),
        v: roll(&fields.v, e2),
    }
}

/// Orbit action with a fractional translation, applied spectrally.
pub fn apply_orbit_fractional(
    fields: &FieldPair,
    grid: &Grid,
    theta: f64,
    shift: &[f64],
) -> FieldPair {
    let e1 = Complex64::from_polar(1.0, theta);
    let e2 = Complex64::from_polar(1.0, 2.0 * theta);
    FieldPair {
        u: fractional_shift(&fields.u, grid, shift).mapv(|c| c * e1),
        v: fractional_shift(&fields.v, grid, shift).mapv(|c| c * e2),
    }
}

/// `H¹ × H¹` distance from `state` to the orbit of `reference`, minimized
/// over integer grid translations (cross-correlation peak, then the ±1-cell
/// neighborhood) and the locked phase pair `(θ, 2θ)` (720 samples plus
/// parabolic refinement).
pub fn orbit_distance(state: &FieldPair, reference: &FieldPair, grid: &Grid) -> Result<f64> {
    state.check_grid(grid)?;
    reference.check_grid(grid)?;

    let w = h1_weight(grid);
    let u_hat = forward_array(&state.u, grid);
    let v_hat = forward_array(&state.v, grid);
    let p_hat = forward_array(&reference.u, grid);
    let q_hat = forward_array(&reference.v, grid);

    let dv = grid.cell_volume();
    let h1 = |spec: &ArrayD<Complex64>| -> f64 {
        spec.iter()
            .zip(w.iter())
            .map(|(c, &w)| w * c.norm_sqr())
            .sum::<f64>()
            * dv
    };
    let norms = h1(&u_hat) + h1(&v_hat) + h1(&p_hat) + h1(&q_hat);

    // c_u(y) = <u, P(·+y)>_{H¹} for every integer shift y at once.
    let corr_u = correlation_map(&u_hat, &p_hat, &w, grid);
    let corr_v = correlation_map(&v_hat, &q_hat, &w, grid);

    // Peak of the θ-free bound |c_u| + |c_v|, then its neighborhood.
    let mut best_idx = vec![0usize; grid.spatial_dim()];
    let mut best_score = f64::NEG_INFINITY;
    for ((idx, cu), cv) in corr_u.indexed_iter().zip(corr_v.iter()) {
        let score = cu.norm() + cv.norm();
        if score > best_score {
            best_score = score;
            best_idx = (0..grid.spatial_dim()).map(|j| idx[j]).collect();
        }
    }

    let mut candidates = neighbor_cells(&best_idx, grid.shape());
    candidates.push(vec![0usize; grid.spatial_dim()]);

    let mut best = f64::INFINITY;
    for cell in candidates {
        let cu = corr_u[ndarray::IxDyn(&cell)];
        let cv = corr_v[ndarray::IxDyn(&cell)];
        let g = max_over_phase(cu, cv);
        let dist_sq = norms - 2.0 * g;
        best = best.min(dist_sq);
    }
    Ok(best.max(0.0).sqrt())
}

fn denominators(grid: &Grid, params: &PhysicsParams) -> (ArrayD<f64>, ArrayD<f64>) {
    let n = grid.spatial_dim();
    let mut w1 = vec![1.0; n];
    *w1.last_mut().unwrap() = params.gamma1;
    let mut w2 = vec![1.0; n];
    *w2.last_mut().unwrap() = params.gamma2;
    let mut den1 = grid.weighted_wave_sq(&w1);
    den1.mapv_inplace(|s| s + params.omega);
    let mut den2 = grid.weighted_wave_sq(&w2);
    den2.mapv_inplace(|s| s + 4.0 * params.omega + params.beta);
    (den1, den2)
}

fn nonlinear_u(fields: &FieldPair) -> ArrayD<Complex64> {
    let mut out = fields.u.clone();
    for (o, v) in out.iter_mut().zip(fields.v.iter()) {
        *o = o.conj() * v;
    }
    out
}

fn nonlinear_v(fields: &FieldPair) -> ArrayD<Complex64> {
    let mut out = fields.u.clone();
    out.mapv_inplace(|u| 0.5 * u * u);
    out
}

fn residual_from_parts(
    p_hat: &ArrayD<Complex64>,
    q_hat: &ArrayD<Complex64>,
    n1: &ArrayD<Complex64>,
    n2: &ArrayD<Complex64>,
    den1: &ArrayD<f64>,
    den2: &ArrayD<f64>,
) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for ((p, n), d) in p_hat.iter().zip(n1.iter()).zip(den1.iter()) {
        num += (n - p * d).norm_sqr();
        den += p.norm_sqr();
    }
    for ((q, n), d) in q_hat.iter().zip(n2.iter()).zip(den2.iter()) {
        num += (n - q * d).norm_sqr();
        den += q.norm_sqr();
    }
    if den == 0.0 {
        f64::INFINITY
    } else {
        (num / den).sqrt()
    }
}

fn finish(
    fields: FieldPair,
    grid: &Grid,
    params: &PhysicsParams,
    history: Vec<f64>,
    iterations: usize,
    stabilizer: f64,
) -> GroundStateResult {
    let kj = kj_functionals(&fields, grid, params);
    let e = 0.5 * kj.k - 0.5 * kj.j;
    let ratios = PohozaevRatios {
        k_over_j: kj.k / kj.j,
        i_over_j: kj.i / kj.j,
        e_over_k: e / kj.k,
    };
    let sup = fields.sup_norm();
    let mut positivity_min = f64::INFINITY;
    let mut max_im: f64 = 0.0;
    for c in fields.u.iter().chain(fields.v.iter()) {
        positivity_min = positivity_min.min(c.re);
        max_im = max_im.max(c.im.abs());
    }
    let residual = *history.last().unwrap();
    GroundStateResult {
        fields,
        residual,
        residual_history: history,
        iterations,
        stabilizer,
        ratios,
        positivity_min,
        imaginary_fraction: if sup > 0.0 { max_im / sup } else { 0.0 },
    }
}

fn h1_weight(grid: &Grid) -> ArrayD<f64> {
    let mut w = grid.weighted_wave_sq(&vec![1.0; grid.spatial_dim()]);
    w.mapv_inplace(|s| 1.0 + s);
    w
}

/// `c(y) = Σ_k w(k) â_k conj(b̂_k) e^{-i 2π y·k/N} · dV` for all integer `y`.
fn correlation_map(
    a_hat: &ArrayD<Complex64>,
    b_hat: &ArrayD<Complex64>,
    weight: &ArrayD<f64>,
    grid: &Grid,
) -> ArrayD<Complex64> {
    let mut cross = a_hat.clone();
    for ((c, b), &w) in cross.iter_mut().zip(b_hat.iter()).zip(weight.iter()) {
        *c = *c * b.conj() * w;
    }
    let mut corr = forward_array(&cross, grid);
    let scale = (grid.total_points() as f64).sqrt() * grid.cell_volume();
    corr.mapv_inplace(|c| c * scale);
    corr
}

fn neighbor_cells(center: &[usize], shape: &[usize]) -> Vec<Vec<usize>> {
    let n = center.len();
    let mut out = Vec::with_capacity(3usize.pow(n as u32));
    let mut offsets = vec![0i64; n];
    loop {
        let cell: Vec<usize> = (0..n)
            .map(|j| ((center[j] as i64 + offsets[j]).rem_euclid(shape[j] as i64)) as usize)
            .collect();
        out.push(cell);
        // odometer over {-1, 0, 1}^n
        let mut j = 0;
        loop {
            if j == n {
                return out;
            }
            offsets[j] += 1;
            if offsets[j] > 1 {
                offsets[j] = -1;
                j += 1;
            } else {
                break;
            }
        }
    }
}

/// Maximize `Re(e^{-iθ} c_u) + Re(e^{-2iθ} c_v)` over `θ`.
fn max_over_phase(cu: Complex64, cv: Complex64) -> f64 {
    let g = |theta: f64| {
        (Complex64::from_polar(1.0, -theta) * cu).re
            + (Complex64::from_polar(1.0, -2.0 * theta) * cv).re
    };
    const SAMPLES: usize = 720;
    let step = 2.0 * std::f64::consts::PI / SAMPLES as f64;
    let mut best_i = 0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..SAMPLES {
        let val = g(i as f64 * step);
        if val > best {
            best = val;
            best_i = i;
        }
    }
    // Parabolic refinement through the peak and its two neighbors.
    let t0 = best_i as f64 * step;
    let f_m = g(t0 - step);
    let f_0 = best;
    let f_p = g(t0 + step);
    let denom = f_m - 2.0 * f_0 + f_p;
    if denom.abs() > 0.0 {
        let delta = 0.5 * (f_m - f_p) / denom;
        let refined = g(t0 + delta * step);
        best = best.max(refined);
    }
    best
}
