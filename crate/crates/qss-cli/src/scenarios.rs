//! Reproducible experiment drivers behind `qss scenario <name>`.
//!
//! Each scenario runs one experiment, collects the measured quantities into
//! a JSON-serializable verdict and reports pass/fail against its thresholds.

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use qss_core::analysis::{
    cgn_threshold_check, hessian_determinant_critical, instability_direction,
    make_supercritical_data, variance_bound_check, GammaCurveBase,
};
use qss_core::analysis::gamma_curve_energy;
use qss_core::evolution::{evolve, evolve_with, RunStatus};
use qss_core::field::FieldPair;
use qss_core::groundstate::{orbit_distance, petviashvili_solve, GroundStateResult};
use qss_core::observables::{gn_quotient, h1_norm_sq, interaction, ObservableRecord};
use qss_core::preset::random_smooth_pair;
use qss_core::{Grid, PhysicsParams};

use crate::config::RunConfig;

pub struct ScenarioOutcome {
    pub pass: bool,
    pub verdict: serde_json::Value,
    pub series: Option<Vec<ObservableRecord>>,
}

pub fn run(name: &str, config: &RunConfig, seed: u64) -> Result<ScenarioOutcome> {
    match name {
        "blowup" => blowup(config),
        "stability" => stability(config, seed),
        "instability" => instability(config),
        "virial-verify" => virial_verify(config),
        "gn-check" => gn_check(config, seed),
        other => bail!("unknown scenario '{other}' (expected blowup, stability, instability, virial-verify, gn-check)"),
    }
}

fn solve_ground_state(grid: &Grid, params: &PhysicsParams, config: &RunConfig) -> Result<GroundStateResult> {
    petviashvili_solve(grid, params, &config.groundstate)
        .context("ground-state solve failed")
}

fn scale_state(fields: &FieldPair, factor: f64) -> FieldPair {
    let s = Complex64::new(factor, 0.0);
    FieldPair {
        u: fields.u.mapv(|c| c * s),
        v: fields.v.mapv(|c| c * s),
    }
}

fn gradient_sq(rec: &ObservableRecord) -> f64 {
    rec.grad_u_sq + rec.grad_v_sq
}

/// Scaled-ground-state and supercritical-data collapse runs with the
/// convexity bound checked along the way.
fn blowup(config: &RunConfig) -> Result<ScenarioOutcome> {
    let grid = config.build_grid()?;
    let params = config.build_params()?;
    let sc = &config.scenario;

    // Branch A: λ·(P, Q) with the configured threshold.
    let gs = solve_ground_state(&grid, &params, config)?;
    let data = scale_state(&gs.fields, sc.lambda_scale);
    let result_a = evolve(&data, &grid, &params, &config.integrator)?;
    let g0 = gradient_sq(&result_a.series[0]);
    let gmax_a = result_a.series.iter().map(gradient_sq).fold(0.0, f64::max);
    let e0 = result_a.series[0].energy;
    let detected_a = result_a.status == RunStatus::BlowupDetected;
    let bound_ok = if detected_a && params.beta >= 0.0 {
        variance_bound_check(&result_a.series, e0, params.beta)?
    } else {
        false
    };

    // Branch B: equal-component data past the threshold amplitude, β ≤ 0.
    let params_b = PhysicsParams::new(params.gamma1, params.gamma2, sc.branch2_beta, params.omega)?;
    let profile = grid.radius_sq().mapv(|r| (-r / 2.0).exp());
    let (lambda_b, data_b) = make_supercritical_data(&profile, &grid, &params_b)?;
    let result_b = evolve(&data_b, &grid, &params_b, &config.integrator)?;
    let detected_b = result_b.status == RunStatus::BlowupDetected;

    let pass = detected_a && bound_ok && detected_b;
    let verdict = json!({
        "scenario": "blowup",
        "pass": pass,
        "branch_a": {
            "lambda": sc.lambda_scale,
            "energy": e0,
            "status": result_a.status,
            "blowup_time": result_a.blowup_time_estimate,
            "max_gradient_ratio": gmax_a / g0,
            "threshold_factor": config.integrator.blowup_factor,
            "variance_bound_ok": bound_ok,
        },
        "branch_b": {
            "beta": sc.branch2_beta,
            "lambda": lambda_b,
            "status": result_b.status,
            "blowup_time": result_b.blowup_time_estimate,
        },
    });
    Ok(ScenarioOutcome {
        pass,
        verdict,
        series: Some(result_a.series),
    })
}

/// Random H¹ perturbations of the ground state: the orbit distance must stay
/// within `distance_factor` of its initial value.
fn stability(config: &RunConfig, seed: u64) -> Result<ScenarioOutcome> {
    let grid = config.build_grid()?;
    let params = config.build_params()?;
    let sc = &config.scenario;
    let gs = solve_ground_state(&grid, &params, config)?;
    let reference = gs.fields.clone();
    let ref_h1 = h1_norm_sq(&reference, &grid).sqrt();

    let mut runs = Vec::new();
    let mut pass = true;
    for pert in 0..sc.perturbations {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(pert as u64));
        let noise = random_smooth_pair(&grid, &mut rng, sc.k_cut);
        let scale = sc.perturbation_rel * ref_h1 / h1_norm_sq(&noise, &grid).sqrt();
        let mut state = reference.clone();
        let s = Complex64::new(scale, 0.0);
        for (a, b) in state.u.iter_mut().zip(noise.u.iter()) {
            *a += s * b;
        }
        for (a, b) in state.v.iter_mut().zip(noise.v.iter()) {
            *a += s * b;
        }

        let d0 = orbit_distance(&state, &reference, &grid)?;
        let mut dmax = d0;
        let mut dist_err = None;
        evolve_with(&state, &grid, &params, &config.integrator, |_, fields, _| {
            match orbit_distance(fields, &reference, &grid) {
                Ok(d) => dmax = dmax.max(d),
                Err(e) => dist_err = Some(e),
            }
        })?;
        if let Some(e) = dist_err {
            return Err(anyhow!(e).context("orbit distance during run"));
        }
        let ok = dmax <= sc.distance_factor * d0;
        pass &= ok;
        runs.push(json!({
            "perturbation": pert,
            "initial_distance": d0,
            "max_distance": dmax,
            "ratio": dmax / d0,
            "ok": ok,
        }));
    }

    let verdict = json!({
        "scenario": "stability",
        "pass": pass,
        "perturbation_rel": sc.perturbation_rel,
        "distance_factor": sc.distance_factor,
        "t_end": config.integrator.t_end,
        "runs": runs,
    });
    Ok(ScenarioOutcome {
        pass,
        verdict,
        series: None,
    })
}

/// Scaling-curve quadratic form at the computed ground state: negative
/// determinant, the critical-dimension reduction, and a finite-difference
/// cross-check of the eigen-direction curvature.
fn instability(config: &RunConfig) -> Result<ScenarioOutcome> {
    let grid = config.build_grid()?;
    let params = config.build_params()?;
    if params.gamma1 != 1.0 || params.gamma2 != 1.0 {
        bail!("instability scenario is normalized to gamma1 = gamma2 = 1");
    }
    let gs = solve_ground_state(&grid, &params, config)?;
    let base = GammaCurveBase::from_ground_state(&gs.fields, &grid, params.beta)?;
    let raw = GammaCurveBase::from_fields_raw(&gs.fields, &grid)?;
    let n = grid.spatial_dim();

    let dir = instability_direction(&base, params.beta, n)
        .context("no negative direction found")?;

    // Closed-form determinant against its critical-dimension specialization.
    let special_ok = if n == 4 && params.beta != 0.0 {
        let special = hessian_determinant_critical(base.k, params.beta, base.q_sq);
        (dir.delta - special).abs() <= 1e-12 * special.abs()
    } else {
        true
    };

    // Finite-difference cross-check along the returned direction.
    let h = 1e-4;
    let e = |t: f64| {
        gamma_curve_energy(&base, params.beta, 1.0 + dir.alpha0 * t, 1.0 + dir.lambda0 * t)
    };
    let fd = (e(h)? - 2.0 * e(0.0)? + e(-h)?) / (h * h);
    let fd_ok = (fd - dir.energy_second_derivative).abs()
        <= 1e-4 * dir.energy_second_derivative.abs();

    let pass = dir.form_value < 0.0 && dir.delta < 0.0 && special_ok && fd_ok;
    let verdict = json!({
        "scenario": "instability",
        "pass": pass,
        "k": base.k,
        "delta": dir.delta,
        "direction": { "alpha0": dir.alpha0, "lambda0": dir.lambda0 },
        "form_value": dir.form_value,
        "energy_second_derivative": dir.energy_second_derivative,
        "finite_difference": fd,
        "specialization_ok": special_ok,
        "identity_residuals": {
            "a0_over_scale": raw.a0_residual(params.beta) / (base.k * base.p_sq_q),
            "b0_over_scale": raw.b0_residual() / (base.k * base.p_sq_q),
        },
    });
    Ok(ScenarioOutcome {
        pass,
        verdict,
        series: None,
    })
}

/// Evolve the configured preset and compare the curvature of the recorded
/// variance series with the second Virial derivative formulas.
fn virial_verify(config: &RunConfig) -> Result<ScenarioOutcome> {
    let grid = config.build_grid()?;
    let params = config.build_params()?;
    let preset = config
        .run
        .preset
        .as_ref()
        .ok_or_else(|| anyhow!("virial-verify needs [run].preset"))?;
    let fields = qss_core::sample_preset(&grid, preset)?;
    let result = evolve(&fields, &grid, &params, &config.integrator)?;
    if result.status != RunStatus::Completed {
        bail!("virial-verify run terminated early: {:?}", result.status);
    }
    let series = &result.series;
    if series.len() < 5 {
        bail!("virial-verify needs at least 5 samples, got {}", series.len());
    }
    let e0 = series[0].energy;
    let tol = config.scenario.tolerance;

    let mut worst_parallel: f64 = 0.0;
    let mut worst_transverse: f64 = 0.0;
    for w in series.windows(3) {
        let h0 = w[1].t - w[0].t;
        let h1 = w[2].t - w[1].t;
        if (h0 - h1).abs() > 1e-9 * h0 {
            continue; // uneven stride at the final clipped sample
        }
        let fd = (w[2].variance - 2.0 * w[1].variance + w[0].variance) / (h0 * h0);
        // Conservation-law reduction 8E₀ - 4β∫|v|² of the parallel identity;
        // ∫|v|² is recovered from the stored E_β = (β/2)∫|v|².
        let reduced = if params.beta == 0.0 {
            8.0 * e0
        } else {
            8.0 * e0 - 8.0 * w[1].energy_parts.e_beta
        };
        worst_parallel = worst_parallel.max((fd - reduced).abs() / reduced.abs().max(1e-300));

        let fd_perp =
            (w[2].variance_perp - 2.0 * w[1].variance_perp + w[0].variance_perp) / (h0 * h0);
        let formula_perp = w[1].d2variance_perp;
        worst_transverse = worst_transverse.max((fd_perp - formula_perp).abs() / formula_perp.abs());
    }

    let pass = worst_parallel <= tol && worst_transverse <= tol;
    let verdict = json!({
        "scenario": "virial-verify",
        "pass": pass,
        "tolerance": tol,
        "worst_parallel_mismatch": worst_parallel,
        "worst_transverse_mismatch": worst_transverse,
        "samples": series.len(),
    });
    Ok(ScenarioOutcome {
        pass,
        verdict,
        series: Some(result.series),
    })
}

/// Sharp-constant threshold at criticality plus the minimality of the
/// computed ground state among random trial pairs.
fn gn_check(config: &RunConfig, seed: u64) -> Result<ScenarioOutcome> {
    let grid = config.build_grid()?;
    let params = config.build_params()?;
    let d = grid.transverse_dim();
    let gs = solve_ground_state(&grid, &params, config)?;
    let check = cgn_threshold_check(&gs.fields, &grid, &params, d)?;
    let window = config.scenario.threshold_window;
    let product_ok = (check.m_product - 1.0).abs() <= window;

    let gn_gs = gn_quotient(&gs.fields, &grid, d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut beaten = 0usize;
    let mut tried = 0usize;
    while tried < config.scenario.gn_trials {
        let w = random_smooth_pair(&grid, &mut rng, config.scenario.k_cut);
        if interaction(&w, &grid) <= 0.0 {
            continue;
        }
        tried += 1;
        if gn_quotient(&w, &grid, d)? < gn_gs * (1.0 - 1e-9) {
            beaten += 1;
        }
    }
    let minimal_ok = beaten == 0;

    let pass = product_ok && minimal_ok;
    let verdict = json!({
        "scenario": "gn-check",
        "pass": pass,
        "c_gn": check.c_gn,
        "mass_threshold_product": check.m_product,
        "window": window,
        "gn_ground_state": gn_gs,
        "random_trials": tried,
        "trials_beating_minimum": beaten,
    });
    Ok(ScenarioOutcome {
        pass,
        verdict,
        series: None,
    })
}
