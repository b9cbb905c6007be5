//! TOML run configuration with a fixed schema; unknown keys are rejected.

use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use qss_core::evolution::IntegratorConfig;
use qss_core::groundstate::PetviashviliConfig;
use qss_core::preset::Preset;
use qss_core::{Grid, PhysicsParams};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSection,
    pub physics: PhysicsSection,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub groundstate: PetviashviliConfig,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub scenario: ScenarioSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
    pub points: Vec<usize>,
    pub lengths: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsSection {
    pub gamma1: f64,
    pub gamma2: f64,
    pub beta: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    /// Initial data for `evolve`.
    pub preset: Option<Preset>,
    /// Emit a `QSS1` snapshot every this many recorded samples (0 = none).
    pub snapshot_every: usize,
    /// Seed for randomized scenario pieces; `--seed` overrides.
    pub seed: u64,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            preset: None,
            snapshot_every: 0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSection {
    /// `stability`: number of random perturbations.
    pub perturbations: usize,
    /// `stability`: relative H¹ size of each perturbation.
    pub perturbation_rel: f64,
    /// `stability`: admissible growth of the orbit distance.
    pub distance_factor: f64,
    /// `stability`: spectral band of the perturbation noise.
    pub k_cut: usize,
    /// `blowup`: amplitude scaling of the ground-state data.
    pub lambda_scale: f64,
    /// `blowup`: β for the second-branch supercritical data.
    pub branch2_beta: f64,
    /// `virial-verify`: relative mismatch allowed for the identities.
    pub tolerance: f64,
    /// `gn-check`: number of random trial pairs.
    pub gn_trials: usize,
    /// `gn-check`: allowed deviation of the threshold product from 1.
    pub threshold_window: f64,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        Self {
            perturbations: 10,
            perturbation_rel: 0.01,
            distance_factor: 5.0,
            k_cut: 6,
            lambda_scale: 1.2,
            branch2_beta: -0.5,
            tolerance: 0.01,
            gn_trials: 100,
            threshold_window: 0.05,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let config: RunConfig = toml::from_str(&text).context("config parse failed")?;
        config.validate_structure()?;
        Ok(config)
    }

    fn validate_structure(&self) -> Result<()> {
        // Re-validate every module invariant on load.
        let _ = self.build_grid()?;
        let _ = self.build_params()?;
        self.integrator.validate().context("integrator section")?;
        self.groundstate.validate().context("groundstate section")?;
        Ok(())
    }

    pub fn build_grid(&self) -> Result<Grid> {
        Ok(Grid::new(
            self.grid.n,
            &self.grid.points,
            &self.grid.lengths,
        )?)
    }

    pub fn build_params(&self) -> Result<PhysicsParams> {
        Ok(PhysicsParams::new(
            self.physics.gamma1,
            self.physics.gamma2,
            self.physics.beta,
            self.physics.omega,
        )?)
    }

    /// Write the fully-resolved configuration next to the outputs.
    pub fn write_resolved(&self, out_dir: &Path) -> Result<()> {
        let text = toml::to_string_pretty(self).context("config serialization")?;
        std::fs::write(out_dir.join("resolved_config.toml"), text)?;
        Ok(())
    }
}
