//! The three subcommands: ground-state solve, time evolution, scenarios.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::json;

use qss_core::error::Error as CoreError;
use qss_core::evolution::{evolve_with, RunStatus};
use qss_core::groundstate::{petviashvili_solve, pohozaev_check};
use qss_core::observables::{ObservableRecord, CSV_HEADER};
use qss_core::{sample_preset, save_snapshot};

use crate::config::RunConfig;
use crate::scenarios;

pub const EXIT_OK: u8 = 0;
pub const EXIT_BLOWUP: u8 = 2;
pub const EXIT_DT_UNDERFLOW: u8 = 3;
pub const EXIT_CRITERION_FAILED: u8 = 4;
pub const EXIT_CONFIG: u8 = 64;

fn write_series(out_dir: &Path, series: &[ObservableRecord]) -> Result<()> {
    let mut w = BufWriter::new(File::create(out_dir.join("series.csv"))?);
    writeln!(w, "{CSV_HEADER}")?;
    for rec in series {
        rec.write_csv_row(&mut w)?;
    }
    w.flush()?;
    Ok(())
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn cmd_groundstate(config: &RunConfig, out_dir: &Path) -> Result<u8> {
    let grid = config.build_grid()?;
    let params = config.build_params()?;
    config.write_resolved(out_dir)?;

    let result = match petviashvili_solve(&grid, &params, &config.groundstate) {
        Ok(r) => r,
        Err(CoreError::NotConverged {
            iterations,
            residual,
            history,
        }) => {
            write_json(
                &out_dir.join("diagnostics.json"),
                &json!({
                    "converged": false,
                    "iterations": iterations,
                    "residual": residual,
                    "residual_history": history,
                }),
            )?;
            eprintln!("ground state did not converge: residual {residual:.3e} after {iterations} iterations");
            return Ok(EXIT_CRITERION_FAILED);
        }
        Err(e) => return Err(e.into()),
    };

    save_snapshot(
        &result.fields,
        &grid,
        &params,
        0.0,
        out_dir.join("state_groundstate.qss1"),
    )?;

    let d = grid.transverse_dim();
    let check = pohozaev_check(&result, d);
    // The β = 0 Pohozaev ratios are meaningless off that line; the
    // fixed-point identity I = (3/2) J holds for every β.
    let ratios_ok = if params.beta == 0.0 {
        check.ok
    } else {
        (result.ratios.i_over_j - 1.5).abs() <= 1e-8
    };

    write_json(
        &out_dir.join("diagnostics.json"),
        &json!({
            "converged": true,
            "residual": result.residual,
            "iterations": result.iterations,
            "stabilizer": result.stabilizer,
            "ratios": {
                "k_over_j": result.ratios.k_over_j,
                "i_over_j": result.ratios.i_over_j,
                "e_over_k": result.ratios.e_over_k,
            },
            "pohozaev": check,
            "positivity_min": result.positivity_min,
            "imaginary_fraction": result.imaginary_fraction,
        }),
    )?;

    if result.residual <= config.groundstate.tol && ratios_ok {
        Ok(EXIT_OK)
    } else {
        eprintln!(
            "ground-state diagnostics out of tolerance: residual {:.3e}, ratios {:?}",
            result.residual, result.ratios
        );
        Ok(EXIT_CRITERION_FAILED)
    }
}

pub fn cmd_evolve(config: &RunConfig, out_dir: &Path) -> Result<u8> {
    let grid = config.build_grid()?;
    let params = config.build_params()?;
    config.write_resolved(out_dir)?;

    let preset = config
        .run
        .preset
        .as_ref()
        .context("evolve needs [run].preset")?;
    let fields = sample_preset(&grid, preset)?;

    let snapshot_every = config.run.snapshot_every;
    let mut snap_err = None;
    let result = evolve_with(
        &fields,
        &grid,
        &params,
        &config.integrator,
        |index, state, rec| {
            if snapshot_every > 0 && index % snapshot_every == 0 && snap_err.is_none() {
                let path = out_dir.join(format!("state_{index:06}.qss1"));
                if let Err(e) = save_snapshot(state, &grid, &params, rec.t, path) {
                    snap_err = Some(e);
                }
            }
        },
    )?;
    if let Some(e) = snap_err {
        return Err(e.into());
    }

    write_series(out_dir, &result.series)?;
    save_snapshot(
        &result.final_state,
        &grid,
        &params,
        result.final_time,
        out_dir.join("state_final.qss1"),
    )?;
    write_json(
        &out_dir.join("verdict.json"),
        &json!({
            "status": result.status,
            "final_time": result.final_time,
            "steps": result.steps,
            "blowup_time_estimate": result.blowup_time_estimate,
        }),
    )?;

    Ok(match result.status {
        RunStatus::Completed => EXIT_OK,
        RunStatus::BlowupDetected => EXIT_BLOWUP,
        RunStatus::DtUnderflow => EXIT_DT_UNDERFLOW,
    })
}

pub fn cmd_scenario(name: &str, config: &RunConfig, out_dir: &Path, seed: u64) -> Result<u8> {
    config.write_resolved(out_dir)?;
    let outcome = scenarios::run(name, config, seed)?;
    write_json(&out_dir.join("verdict.json"), &outcome.verdict)?;
    if let Some(series) = &outcome.series {
        write_series(out_dir, series)?;
    }
    if outcome.pass {
        println!("scenario {name}: pass");
        Ok(EXIT_OK)
    } else {
        eprintln!(
            "scenario {name}: FAILED\n{}",
            serde_json::to_string_pretty(&outcome.verdict)?
        );
        Ok(EXIT_CRITERION_FAILED)
    }
}
