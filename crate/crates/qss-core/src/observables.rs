//! Scalar functionals of the state: mass, energy and its decomposition, the
//! quadratic functionals `K`, `J`, `I`, the action `S`, the Gagliardo -
//! Nirenberg quotient, variances and the exact Virial derivative formulas.
//!
//! All integrals use the rectangle rule (spectrally exact on the periodic
//! grid); all gradients are spectral. The Virial quantities assume the state
//! is well localized: a boundary-mass check warns when less than a `1e-8`
//! fraction of the mass does not sit in the outermost cell layer.

use std::io::Write;
use std::sync::atomic::{AtomicBool, Ordering};

use ndarray::ArrayD;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::FieldPair;
use crate::grid::{Grid, PhysicsParams};
use crate::transform::{forward_array, gradient_component, spectral_quadratic};

pub const BOUNDARY_MASS_THRESHOLD: f64 = 1e-8;

/// The four-term energy decomposition. `E = E_γ1 + E_γ2 + E_β - E_Re`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParts {
    pub e_gamma1: f64,
    pub e_gamma2: f64,
    pub e_beta: f64,
    pub e_re: f64,
}

impl EnergyParts {
    pub fn total(&self) -> f64 {
        self.e_gamma1 + self.e_gamma2 + self.e_beta - self.e_re
    }
}

/// `K`, `J`, the constrained functional `I = K + ωM` and action `S = E + ωM`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KjValues {
    pub k: f64,
    pub j: f64,
    pub i: f64,
    pub s: f64,
}

/// One time sample of every conserved/diagnostic functional.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableRecord {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub energy_parts: EnergyParts,
    pub k: f64,
    pub j: f64,
    pub variance: f64,
    pub variance_perp: f64,
    pub dvariance: f64,
    pub dvariance_perp: f64,
    /// `None` when `γ1 ≠ γ2` (no closed identity in that case).
    pub d2variance: Option<f64>,
    pub d2variance_perp: f64,
    pub grad_u_sq: f64,
    pub grad_v_sq: f64,
}

pub const CSV_HEADER: &str =
    "t,M,E,E_g1,E_g2,E_beta,E_Re,K,J,V,V_perp,dV,dV_perp,d2V,d2V_perp,grad_u_sq,grad_v_sq";

impl ObservableRecord {
    pub fn write_csv_row(&self, w: &mut impl Write) -> std::io::Result<()> {
        let d2v = match self.d2variance {
            Some(x) => format!("{x}"),
            None => String::new(),
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.t,
            self.mass,
            self.energy,
            self.energy_parts.e_gamma1,
            self.energy_parts.e_gamma2,
            self.energy_parts.e_beta,
            self.energy_parts.e_re,
            self.k,
            self.j,
            self.variance,
            self.variance_perp,
            self.dvariance,
            self.dvariance_perp,
            d2v,
            self.d2variance_perp,
            self.grad_u_sq,
            self.grad_v_sq,
        )
    }
}

/// Precomputed symbols and coordinate fields for repeated evaluation along a
/// trajectory. All methods are pure; the struct is safe to share.
pub struct ObservableContext {
    grid: Grid,
    params: PhysicsParams,
    sym_perp: ArrayD<f64>,
    sym_last: ArrayD<f64>,
    r_sq: ArrayD<f64>,
    r_perp_sq: ArrayD<f64>,
    warned_boundary: AtomicBool,
}

impl ObservableContext {
    pub fn new(grid: &Grid, params: &PhysicsParams) -> Result<Self> {
        let n = grid.spatial_dim();
        let mut wp = vec![1.0; n];
        *wp.last_mut().unwrap() = 0.0;
        let mut wl = vec![0.0; n];
        *wl.last_mut().unwrap() = 1.0;
        Ok(Self {
            grid: grid.clone(),
            params: *params,
            sym_perp: grid.weighted_wave_sq(&wp),
            sym_last: grid.weighted_wave_sq(&wl),
            r_sq: grid.radius_sq(),
            r_perp_sq: grid.radius_sq_perp(),
            warned_boundary: AtomicBool::new(false),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn params(&self) -> &PhysicsParams {
        &self.params
    }

    /// Evaluate every functional at time `t`.
    pub fn record(&self, fields: &FieldPair, t: f64) -> ObservableRecord {
        fields
            .check_grid(&self.grid)
            .expect("state shape does not match grid");
        let grid = &self.grid;
        let params = &self.params;
        let dv = grid.cell_volume();

        let mass = mass(fields, grid);
        let j = interaction(fields, grid);

        let u_hat = forward_array(&fields.u, grid);
        let v_hat = forward_array(&fields.v, grid);

        let perp_u = spectral_quadratic(&u_hat, &self.sym_perp, grid);
        let perp_v = spectral_quadratic(&v_hat, &self.sym_perp, grid);
        let last_u = spectral_quadratic(&u_hat, &self.sym_last, grid);
        let last_v = spectral_quadratic(&v_hat, &self.sym_last, grid);

        let grad_u_g1 = perp_u + params.gamma1 * last_u;
        let grad_v_g2 = perp_v + params.gamma2 * last_v;
        let v_sq: f64 = fields.v.iter().map(|c| c.norm_sqr()).sum::<f64>() * dv;

        let energy_parts = EnergyParts {
            e_gamma1: 0.5 * grad_u_g1,
            e_gamma2: 0.5 * grad_v_g2,
            e_beta: 0.5 * params.beta * v_sq,
            e_re: 0.5 * j,
        };
        let energy = energy_parts.total();
        let k = grad_u_g1 + grad_v_g2 + params.beta * v_sq;

        let variance = 0.5 * weighted_density(fields, &self.r_sq, dv);
        let variance_perp = 0.5 * weighted_density(fields, &self.r_perp_sq, dv);
        self.check_boundary_mass(fields, mass);

        // First Virial derivatives: per-axis moments of Im(∂_j f · f̄).
        let n = grid.spatial_dim();
        let d = grid.transverse_dim();
        let mut dvariance = 0.0;
        let mut dvariance_perp = 0.0;
        for axis in 0..n {
            let eu = axis_phase_moment(&u_hat, &fields.u, grid, axis);
            let ev = axis_phase_moment(&v_hat, &fields.v, grid, axis);
            let (w_u, w_v) = if axis == n - 1 {
                (params.gamma1, params.gamma2)
            } else {
                (1.0, 1.0)
            };
            dvariance += 2.0 * w_u * eu + 4.0 * w_v * ev;
            if axis < n - 1 {
                dvariance_perp += 2.0 * eu + 4.0 * ev;
            }
        }

        // Second Virial derivative formulas. The anisotropic identity carries
        // the square of the common weight on the distinguished axis.
        let d2variance = if params.gamma1 == params.gamma2 {
            let g = params.gamma1;
            Some(4.0 * (perp_u + perp_v + g * g * (last_u + last_v)) - (d as f64 + g) * j)
        } else {
            None
        };
        let d2variance_perp = 4.0 * (perp_u + perp_v) - d as f64 * j;

        ObservableRecord {
            t,
            mass,
            energy,
            energy_parts,
            k,
            j,
            variance,
            variance_perp,
            dvariance,
            dvariance_perp,
            d2variance,
            d2variance_perp,
            grad_u_sq: perp_u + last_u,
            grad_v_sq: perp_v + last_v,
        }
    }

    fn check_boundary_mass(&self, fields: &FieldPair, total_mass: f64) {
        if total_mass <= 0.0 || self.warned_boundary.load(Ordering::Relaxed) {
            return;
        }
        let frac = boundary_mass_fraction(fields, &self.grid);
        if frac > BOUNDARY_MASS_THRESHOLD {
            self.warned_boundary.store(true, Ordering::Relaxed);
            log::warn!(
                "boundary mass fraction {frac:.3e} exceeds {BOUNDARY_MASS_THRESHOLD:.0e}; \
                 variance and Virial identities assume a decayed state"
            );
        }
    }
}

/// `M = ∫ (|u|² + 4|v|²)`.
pub fn mass(fields: &FieldPair, grid: &Grid) -> f64 {
    fields
        .u
        .iter()
        .zip(fields.v.iter())
        .map(|(u, v)| u.norm_sqr() + 4.0 * v.norm_sqr())
        .sum::<f64>()
        * grid.cell_volume()
}

/// `J = Re ∫ ū² v`.
pub fn interaction(fields: &FieldPair, grid: &Grid) -> f64 {
    fields
        .u
        .iter()
        .zip(fields.v.iter())
        .map(|(u, v)| (u.conj() * u.conj() * v).re)
        .sum::<f64>()
        * grid.cell_volume()
}

/// Energy and its four-part decomposition.
pub fn energy(fields: &FieldPair, grid: &Grid, params: &PhysicsParams) -> (f64, EnergyParts) {
    let ctx = ObservableContext::new(grid, params).expect("context");
    let rec = ctx.record(fields, 0.0);
    (rec.energy, rec.energy_parts)
}

/// `K`, `J`, `I = K + ωM`, `S = E + ωM`.
pub fn kj_functionals(fields: &FieldPair, grid: &Grid, params: &PhysicsParams) -> KjValues {
    let ctx = ObservableContext::new(grid, params).expect("context");
    let rec = ctx.record(fields, 0.0);
    let m = rec.mass;
    KjValues {
        k: rec.k,
        j: rec.j,
        i: rec.k + params.omega * m,
        s: rec.energy + params.omega * m,
    }
}

/// Scale-invariant quotient `M^{3/2-(d+1)/4} K^{(d+1)/4} / J` with plain
/// (unweighted) gradients and `β` taken as zero.
pub fn gn_quotient(fields: &FieldPair, grid: &Grid, d: usize) -> Result<f64> {
    if d + 1 != grid.spatial_dim() {
        return Err(Error::Unsupported(format!(
            "quotient exponents for d = {d} require an n = {} grid, got n = {}",
            d + 1,
            grid.spatial_dim()
        )));
    }
    let j = interaction(fields, grid);
    if !(j > 0.0) {
        return Err(Error::UndefinedQuotient(format!(
            "GN quotient needs J > 0, got {j:.6e}"
        )));
    }
    let m = mass(fields, grid);
    let u_hat = forward_array(&fields.u, grid);
    let v_hat = forward_array(&fields.v, grid);
    let sym = grid.weighted_wave_sq(&vec![1.0; grid.spatial_dim()]);
    let k0 = spectral_quadratic(&u_hat, &sym, grid) + spectral_quadratic(&v_hat, &sym, grid);
    let e_k = (d as f64 + 1.0) / 4.0;
    let e_m = 1.5 - e_k;
    Ok(m.powf(e_m) * k0.powf(e_k) / j)
}

/// `V = ½ ∫ |x|² (|u|² + 4|v|²)`.
pub fn variance(fields: &FieldPair, grid: &Grid) -> f64 {
    0.5 * weighted_density(fields, &grid.radius_sq(), grid.cell_volume())
}

/// `V_⊥ = ½ ∫ |x_⊥|² (|u|² + 4|v|²)`.
pub fn transverse_variance(fields: &FieldPair, grid: &Grid) -> f64 {
    0.5 * weighted_density(fields, &grid.radius_sq_perp(), grid.cell_volume())
}

/// Exact first Virial derivatives `(dV/dt, dV_⊥/dt)` evaluated from the
/// state; both vanish on real fields.
pub fn virial_first_derivative(
    fields: &FieldPair,
    grid: &Grid,
    params: &PhysicsParams,
) -> (f64, f64) {
    let ctx = ObservableContext::new(grid, params).expect("context");
    let rec = ctx.record(fields, 0.0);
    (rec.dvariance, rec.dvariance_perp)
}

/// Second Virial derivative formulas `(d²V/dt², d²V_⊥/dt²)`; the first is
/// `None` unless `γ1 = γ2`.
pub fn virial_second_formula(
    fields: &FieldPair,
    grid: &Grid,
    params: &PhysicsParams,
) -> (Option<f64>, f64) {
    let ctx = ObservableContext::new(grid, params).expect("context");
    let rec = ctx.record(fields, 0.0);
    (rec.d2variance, rec.d2variance_perp)
}

/// Conservation-law reductions of the second Virial formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VirialReduction {
    /// `8 E_0 - 4β ∫|v|²`; equals `d²V/dt²` for `d = 3`, `γ1 = γ2 = 1`.
    pub d2v_reduced: Option<f64>,
    /// `8 E_0 - 4β ∫|v|² - 4 ∫ (γ1 |∂_{x_{d+1}}u|² + γ2 |∂_{x_{d+1}}v|²)`;
    /// equals `d²V_⊥/dt²` for `d = 4`.
    pub d2v_perp_reduced: Option<f64>,
}

/// Evaluate the reduced forms from a conserved energy `e0` and the current
/// state. Defined only in the dimensions where the reductions hold.
pub fn virial_reduction(
    fields: &FieldPair,
    grid: &Grid,
    params: &PhysicsParams,
    e0: f64,
) -> VirialReduction {
    let dv = grid.cell_volume();
    let v_sq: f64 = fields.v.iter().map(|c| c.norm_sqr()).sum::<f64>() * dv;
    let d = grid.transverse_dim();

    let d2v_reduced = if d == 3 && params.gamma1 == 1.0 && params.gamma2 == 1.0 {
        Some(8.0 * e0 - 4.0 * params.beta * v_sq)
    } else {
        None
    };
    let d2v_perp_reduced = if d == 4 {
        let mut wl = vec![0.0; grid.spatial_dim()];
        *wl.last_mut().unwrap() = 1.0;
        let sym_last = grid.weighted_wave_sq(&wl);
        let u_hat = forward_array(&fields.u, grid);
        let v_hat = forward_array(&fields.v, grid);
        let last = params.gamma1 * spectral_quadratic(&u_hat, &sym_last, grid)
            + params.gamma2 * spectral_quadratic(&v_hat, &sym_last, grid);
        Some(8.0 * e0 - 4.0 * params.beta * v_sq - 4.0 * last)
    } else {
        None
    };
    VirialReduction {
        d2v_reduced,
        d2v_perp_reduced,
    }
}

/// Squared `H¹ × H¹` norm `∫(|u|² + |∇u|² + |v|² + |∇v|²)`, plain gradients.
pub fn h1_norm_sq(fields: &FieldPair, grid: &Grid) -> f64 {
    let u_hat = forward_array(&fields.u, grid);
    let v_hat = forward_array(&fields.v, grid);
    let mut w = grid.weighted_wave_sq(&vec![1.0; grid.spatial_dim()]);
    w.mapv_inplace(|s| 1.0 + s);
    spectral_quadratic(&u_hat, &w, grid) + spectral_quadratic(&v_hat, &w, grid)
}

/// Fraction of the mass sitting in the outermost cell layer.
pub fn boundary_mass_fraction(fields: &FieldPair, grid: &Grid) -> f64 {
    let total = mass(fields, grid);
    if total <= 0.0 {
        return 0.0;
    }
    let shape = grid.shape().to_vec();
    let mut boundary = 0.0;
    for (idx, (u, v)) in ndarray::indices(shape.as_slice())
        .into_iter()
        .zip(fields.u.iter().zip(fields.v.iter()))
    {
        let on_edge = (0..shape.len()).any(|j| idx[j] == 0 || idx[j] == shape[j] - 1);
        if on_edge {
            boundary += u.norm_sqr() + 4.0 * v.norm_sqr();
        }
    }
    boundary * grid.cell_volume() / total
}

fn weighted_density(fields: &FieldPair, weight: &ArrayD<f64>, dv: f64) -> f64 {
    fields
        .u
        .iter()
        .zip(fields.v.iter())
        .zip(weight.iter())
        .map(|((u, v), &w)| w * (u.norm_sqr() + 4.0 * v.norm_sqr()))
        .sum::<f64>()
        * dv
}

/// `∫ x_axis · Im(∂_axis f · f̄)`.
fn axis_phase_moment(
    spec: &ArrayD<Complex64>,
    field: &ArrayD<Complex64>,
    grid: &Grid,
    axis: usize,
) -> f64 {
    let grad = gradient_component(spec, grid, axis);
    let coords = grid.coords(axis);
    let mut acc = 0.0;
    for ((idx, g), f) in grad.indexed_iter().zip(field.iter()) {
        acc += coords[idx[axis]] * (g * f.conj()).im;
    }
    acc * grid.cell_volume()
}
