//! End-to-end checks of the binary: exit codes, emitted files, determinism.

use std::path::{Path, PathBuf};
use std::process::Command;

fn qss() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qss"))
}

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("qss_cli_tests").join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("config.toml");
    std::fs::write(&path, body).unwrap();
    path
}

const GS_CONFIG: &str = r#"
[grid]
n = 2
points = [64, 64]
lengths = [28.0, 28.0]

[physics]
gamma1 = 1.0
gamma2 = 1.0
beta = 0.0
omega = 1.0
"#;

#[test]
fn groundstate_reference_run_passes() {
    let dir = workdir("gs_ok");
    let config = write_config(&dir, GS_CONFIG);
    let out = dir.join("out");
    let status = qss()
        .args(["groundstate", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(out.join("state_groundstate.qss1").exists());
    assert!(out.join("resolved_config.toml").exists());
    let diag: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("diagnostics.json")).unwrap())
            .unwrap();
    assert_eq!(diag["converged"], true);
    let k_over_j = diag["ratios"]["k_over_j"].as_f64().unwrap();
    assert!((k_over_j - 0.5).abs() < 1e-5, "K/J = {k_over_j}");
}

#[test]
fn negative_omega_is_a_config_rejection() {
    let dir = workdir("gs_bad_omega");
    let config = write_config(&dir, &GS_CONFIG.replace("omega = 1.0", "omega = -1.0"));
    let status = qss()
        .args(["groundstate", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(4)); // admissibility failure at solve time
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = workdir("gs_unknown_key");
    let config = write_config(&dir, &format!("{GS_CONFIG}\nturbo = true\n"));
    let status = qss()
        .args(["groundstate", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(64));
}

#[test]
fn max_iter_one_reports_failure_with_residual() {
    let dir = workdir("gs_max_iter");
    let config = write_config(&dir, &format!("{GS_CONFIG}\n[groundstate]\nmax_iter = 1\n"));
    let out = dir.join("out");
    let status = qss()
        .args(["groundstate", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(4));
    let diag: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("diagnostics.json")).unwrap())
            .unwrap();
    assert_eq!(diag["converged"], false);
    assert!(diag["residual"].as_f64().unwrap() > 0.0);
}

const EVOLVE_CONFIG: &str = r#"
[grid]
n = 2
points = [48, 48]
lengths = [22.0, 22.0]

[physics]
gamma1 = 1.0
gamma2 = 1.0
beta = 0.2
omega = 1.0

[integrator]
dt0 = 2e-3
t_end = 0.2
record_every = 10

[run]
preset = { kind = "gaussian", amp_u = 1.0, amp_v = 0.5, sigma = 1.2 }
snapshot_every = 5
"#;

#[test]
fn evolve_writes_series_snapshots_and_is_deterministic() {
    let dir = workdir("evolve_ok");
    let config = write_config(&dir, EVOLVE_CONFIG);
    let run = |out: &Path| {
        let status = qss()
            .args(["evolve", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
    };
    let out1 = dir.join("out1");
    let out2 = dir.join("out2");
    run(&out1);
    run(&out2);

    assert!(out1.join("state_final.qss1").exists());
    assert!(out1.join("state_000000.qss1").exists());
    assert!(out1.join("verdict.json").exists());
    let csv1 = std::fs::read(out1.join("series.csv")).unwrap();
    let csv2 = std::fs::read(out2.join("series.csv")).unwrap();
    assert_eq!(csv1, csv2, "CSV outputs must be byte-identical");

    // The header line matches the documented column order.
    let text = String::from_utf8(csv1).unwrap();
    assert!(text.starts_with(
        "t,M,E,E_g1,E_g2,E_beta,E_Re,K,J,V,V_perp,dV,dV_perp,d2V,d2V_perp,grad_u_sq,grad_v_sq"
    ));

    // Zero data: completed with exit 0.
    let zero_cfg = write_config(
        &dir,
        &EVOLVE_CONFIG.replace("amp_u = 1.0, amp_v = 0.5", "amp_u = 0.0, amp_v = 0.0"),
    );
    let status = qss()
        .args(["evolve", "--config"])
        .arg(&zero_cfg)
        .arg("--out")
        .arg(dir.join("out_zero"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
}

#[test]
fn evolve_underflow_exit_code() {
    let dir = workdir("evolve_underflow");
    let config = write_config(
        &dir,
        &EVOLVE_CONFIG.replace(
            "[integrator]\ndt0 = 2e-3\nt_end = 0.2\nrecord_every = 10",
            "[integrator]\ndt0 = 2e-3\nt_end = 0.2\nrecord_every = 10\ncfl_const = 1e-9\ndt_min = 1e-7",
        ),
    );
    let status = qss()
        .args(["evolve", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
}

#[test]
fn resolved_config_round_trips() {
    let dir = workdir("roundtrip");
    let config = write_config(&dir, EVOLVE_CONFIG);
    let out1 = dir.join("out1");
    let status = qss()
        .args(["evolve", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out1)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));

    // Re-run from the resolved config and compare outputs byte for byte.
    let out2 = dir.join("out2");
    let status = qss()
        .args(["evolve", "--config"])
        .arg(out1.join("resolved_config.toml"))
        .arg("--out")
        .arg(&out2)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert_eq!(
        std::fs::read(out1.join("series.csv")).unwrap(),
        std::fs::read(out2.join("series.csv")).unwrap()
    );
}

#[test]
fn scenario_stability_small_passes_and_writes_verdict() {
    let dir = workdir("scenario_stability");
    let config = write_config(
        &dir,
        r#"
[grid]
n = 2
points = [48, 48]
lengths = [24.0, 24.0]

[physics]
gamma1 = 1.0
gamma2 = 1.0
beta = 0.0
omega = 1.0

[integrator]
dt0 = 5e-3
t_end = 2.0
record_every = 50

[scenario]
perturbations = 2
perturbation_rel = 0.01
distance_factor = 5.0
"#,
    );
    let out = dir.join("out");
    let status = qss()
        .args(["scenario", "stability", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .args(["--seed", "7"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let verdict: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("verdict.json")).unwrap()).unwrap();
    assert_eq!(verdict["pass"], true);
    assert_eq!(verdict["runs"].as_array().unwrap().len(), 2);
}

#[test]
fn scenario_rejects_unknown_name() {
    let dir = workdir("scenario_unknown");
    let config = write_config(&dir, GS_CONFIG);
    let status = qss()
        .args(["scenario", "warp-drive", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(4));
}
