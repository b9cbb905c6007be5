//! Pseudospectral simulator and ground-state toolkit for the coupled
//! quadratic Schrödinger system
//!
//! ```text
//!   i u_t + Δ_{γ1} u + ū v           = 0
//!   2i v_t + Δ_{γ2} v - β v + ½ u²   = 0,     x ∈ ℝ^d × ℝ, 1 ≤ d ≤ 4,
//! ```
//!
//! on a periodic box, with `Δ_γ = ∂²_{x_1} + … + ∂²_{x_d} + γ ∂²_{x_{d+1}}`.
//!
//! The crate provides:
//! - spectral grids, transforms and bit-exact `QSS1` state snapshots
//!   ([`grid`], [`transform`], [`snapshot`]);
//! - every conserved and diagnostic functional, including the exact Virial
//!   derivative formulas ([`observables`]);
//! - Strang split-step time integration with blow-up detection
//!   ([`evolution`]);
//! - ground states of the stationary system by stabilized spectral fixed
//!   point, with Pohozaev and orbit diagnostics ([`groundstate`]);
//! - blow-up predicates, the scaling-curve instability machinery and the
//!   sharp Gagliardo-Nirenberg threshold check ([`analysis`]).

pub mod analysis;
pub mod error;
pub mod evolution;
pub mod field;
pub mod grid;
pub mod groundstate;
pub mod observables;
pub mod preset;
pub mod snapshot;
pub mod transform;

pub use error::{Error, Result};
pub use field::{FieldPair, SpectrumPair};
pub use grid::{laplacian_symbol, Grid, PhysicsParams};
pub use preset::{sample_preset, Preset};
pub use snapshot::{load_snapshot, save_snapshot};

/// Grid construction; see [`Grid::new`].
pub fn make_grid(spatial_dim: usize, points: &[usize], lengths: &[f64]) -> Result<Grid> {
    Grid::new(spatial_dim, points, lengths)
}
