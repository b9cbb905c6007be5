use std::time::Instant;
use qss_core::grid::{Grid, PhysicsParams};
use qss_core::groundstate::{petviashvili_solve, PetviashviliConfig};
use qss_core::evolution::{evolve, IntegratorConfig, RunStatus};
use qss_core::field::FieldPair;
use qss_core::observables::{energy, mass};
use qss_core::analysis::{make_supercritical_data, variance_bound_check};

fn main() {
    let grid = Grid::new(4, &[24; 4], &[12.0; 4]).unwrap();
    let params = PhysicsParams::new(1.0, 1.0, 0.0, 1.0).unwrap();
    let t0 = Instant::now();
    let gs = petviashvili_solve(&grid, &params, &PetviashviliConfig::default()).unwrap();
    println!("gs: {} iters res {:.2e} K/J {:.6} E/K {:.2e} ({:.0?})",
        gs.iterations, gs.residual, gs.ratios.k_over_j, gs.ratios.e_over_k, t0.elapsed());

    let scaled = FieldPair {
        u: gs.fields.u.mapv(|c| c * 1.2),
        v: gs.fields.v.mapv(|c| c * 1.2),
    };
    let (e0, _) = energy(&scaled, &grid, &params);
    println!("E(1.2 gs) = {:.3} M = {:.3} sup = {:.3}", e0, mass(&scaled, &grid), scaled.sup_norm());

    for (factor, dtmin) in [(25.0, 1e-5), (1e3, 1e-4)] {
        let config = IntegratorConfig {
            dt0: 1e-3, dt_min: dtmin, dt_max: 2e-3,
            cfl_const: 1e-3 * scaled.sup_norm(),
            t_end: 5.0, blowup_factor: factor, record_every: 25,
            ..Default::default()
        };
        let t0 = Instant::now();
        let r = evolve(&scaled, &grid, &params, &config).unwrap();
        let g0 = r.series[0].grad_u_sq + r.series[0].grad_v_sq;
        let gmax = r.series.iter().map(|s| s.grad_u_sq + s.grad_v_sq).fold(0.0, f64::max);
        println!("factor {factor}: status {:?} t_final {:.3} steps {} max_ratio {:.1} t* {:?} ({:.0?})",
            r.status, r.final_time, r.steps, gmax / g0, r.blowup_time_estimate, t0.elapsed());
        if r.status == RunStatus::BlowupDetected {
            let vb = variance_bound_check(&r.series, e0, params.beta).unwrap();
            println!("  variance bound up to detection: {}", vb);
        }
    }

    // Branch 2: beta = -0.5 supercritical data.
    let params2 = PhysicsParams::new(1.0, 1.0, -0.5, 1.0).unwrap();
    let profile = grid.radius_sq().mapv(|r| (-r / 2.0).exp());
    let (lambda, data) = make_supercritical_data(&profile, &grid, &params2).unwrap();
    println!("branch2 lambda = {:.4} sup = {:.3}", lambda, data.sup_norm());
    let config = IntegratorConfig {
        dt0: 1e-3, dt_min: 1e-5, dt_max: 2e-3,
        cfl_const: 1e-3 * data.sup_norm(),
        t_end: 5.0, blowup_factor: 25.0, record_every: 25,
        ..Default::default()
    };
    let t0 = Instant::now();
    let r = evolve(&data, &grid, &params2, &config).unwrap();
    let g0 = r.series[0].grad_u_sq + r.series[0].grad_v_sq;
    let gmax = r.series.iter().map(|s| s.grad_u_sq + s.grad_v_sq).fold(0.0, f64::max);
    println!("branch2: status {:?} t {:.3} steps {} ratio {:.1} ({:.0?})", r.status, r.final_time, r.steps, gmax / g0, t0.elapsed());
}
