//! Plane linear elasticity: constitutive law, Navier residuals and the
//! closed-form near-tip (Williams) reference fields.
//!
//! Plane stress is handled through the effective Poisson ratio
//! `ν̄ = ν/(1+ν)` substituted into the plane-strain Hooke law with the true
//! shear modulus, so a single code path serves both assumptions.

use serde::{Deserialize, Serialize};

use crate::autodiff::SpatialJet;
use crate::{Error, Result};

/// 2D plane assumption for the elasticity reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlaneAssumption {
    PlaneStrain,
    PlaneStress,
}

/// Isotropic linear-elastic material under a plane assumption.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub youngs_modulus: f64,
    pub poisson_ratio: f64,
    pub assumption: PlaneAssumption,
}

impl Material {
    pub fn new(youngs_modulus: f64, poisson_ratio: f64, assumption: PlaneAssumption) -> Result<Self> {
        if !(youngs_modulus > 0.0) {
            return Err(Error::InvalidMaterial(format!(
                "youngs_modulus must be positive, got {youngs_modulus}"
            )));
        }
        if !(0.0..0.5).contains(&poisson_ratio) {
            return Err(Error::InvalidMaterial(format!(
                "poisson_ratio out of range [0, 0.5), got {poisson_ratio}"
            )));
        }
        Ok(Self { youngs_modulus, poisson_ratio, assumption })
    }

    /// Shear modulus `μ = E / (2(1+ν))`.
    pub fn shear_modulus(&self) -> f64 {
        self.youngs_modulus / (2.0 * (1.0 + self.poisson_ratio))
    }

    /// Kolosov constant: `3−4ν` (plane strain) or `(3−ν)/(1+ν)` (plane stress).
    pub fn kolosov(&self) -> f64 {
        match self.assumption {
            PlaneAssumption::PlaneStrain => 3.0 - 4.0 * self.poisson_ratio,
            PlaneAssumption::PlaneStress => {
                (3.0 - self.poisson_ratio) / (1.0 + self.poisson_ratio)
            }
        }
    }

    /// Poisson ratio entering the plane-strain-form Hooke law.
    ///
    /// Equals `ν` for plane strain and `ν/(1+ν)` for plane stress, which is
    /// the standard trick that makes the plane-strain formulas produce
    /// plane-stress results (note `3−4ν̄ = (3−ν)/(1+ν)`, consistent with
    /// [`Material::kolosov`]).
    pub fn effective_poisson(&self) -> f64 {
        match self.assumption {
            PlaneAssumption::PlaneStrain => self.poisson_ratio,
            PlaneAssumption::PlaneStress => self.poisson_ratio / (1.0 + self.poisson_ratio),
        }
    }
}

/// Symmetric in-plane stress state (`σ21 ≡ σ12` by construction).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StressState {
    pub s11: f64,
    pub s22: f64,
    pub s12: f64,
}

/// Small strains `ε_ij = (u_i,j + u_j,i)/2` from a displacement gradient
/// `du[i][j] = ∂u_i/∂x_j`.
pub fn strain_from_gradient(du: [[f64; 2]; 2]) -> (f64, f64, f64) {
    let e11 = du[0][0];
    let e22 = du[1][1];
    let e12 = 0.5 * (du[0][1] + du[1][0]);
    (e11, e22, e12)
}

/// Hooke's law `σ_ij = 2μ (ε_ij + ν̄/(1−2ν̄) ε_kk δ_ij)` with the material's
/// effective Poisson ratio.
pub fn stress_from_strain(strain: (f64, f64, f64), material: &Material) -> StressState {
    let (e11, e22, e12) = strain;
    let mu = material.shear_modulus();
    let nu = material.effective_poisson();
    let c = nu / (1.0 - 2.0 * nu);
    let trace = e11 + e22;
    StressState {
        s11: 2.0 * mu * (e11 + c * trace),
        s22: 2.0 * mu * (e22 + c * trace),
        s12: 2.0 * mu * e12,
    }
}

/// Traction vector `t_i = σ_ij n_j` for a unit outward normal.
pub fn traction(stress: &StressState, normal: [f64; 2]) -> Result<[f64; 2]> {
    let len = (normal[0] * normal[0] + normal[1] * normal[1]).sqrt();
    if (len - 1.0).abs() > 1e-12 {
        return Err(Error::NonUnitNormal { length: len });
    }
    Ok([
        stress.s11 * normal[0] + stress.s12 * normal[1],
        stress.s12 * normal[0] + stress.s22 * normal[1],
    ])
}

/// Residuals of the displacement-form equilibrium equations,
///
/// ```text
/// R1 = μ (u1,11 + u1,22) + μ/(1−2ν̄) (u1,11 + u2,12) + f1
/// R2 = μ (u2,11 + u2,22) + μ/(1−2ν̄) (u2,22 + u1,12) + f2
/// ```
///
/// so both vanish iff pointwise equilibrium holds.
pub fn navier_residual(
    u1: &SpatialJet,
    u2: &SpatialJet,
    material: &Material,
    body_force: [f64; 2],
) -> (f64, f64) {
    let mu = material.shear_modulus();
    let nu = material.effective_poisson();
    let k = mu / (1.0 - 2.0 * nu);
    let r1 = mu * (u1.hxx + u1.hyy) + k * (u1.hxx + u2.hxy) + body_force[0];
    let r2 = mu * (u2.hxx + u2.hyy) + k * (u2.hyy + u1.hxy) + body_force[1];
    (r1, r2)
}

/// Leading-order near-tip displacement field for combined modes I and II.
///
/// `(r, θ)` are tip-local polar coordinates with `θ = 0` ahead of the tip;
/// the returned components are in the tip-local frame. The mode-II `u2`
/// term carries the sign that keeps the field in equilibrium and consistent
/// with [`williams_stress`] (checked by the field-consistency oracle).
pub fn williams_displacement(
    k_i: f64,
    k_ii: f64,
    r: f64,
    theta: f64,
    mu: f64,
    kappa: f64,
) -> [f64; 2] {
    let amp = (r / (2.0 * std::f64::consts::PI)).sqrt() / (2.0 * mu);
    let (sh, ch) = (theta / 2.0).sin_cos();
    let ct = theta.cos();
    let u1 = k_i * amp * (kappa - ct) * ch + k_ii * amp * sh * (kappa + 2.0 + ct);
    let u2 = k_i * amp * (kappa - ct) * sh + k_ii * amp * ch * (2.0 - kappa - ct);
    [u1, u2]
}

/// Leading-order near-tip stress field for combined modes I and II, in the
/// tip-local frame.
pub fn williams_stress(k_i: f64, k_ii: f64, r: f64, theta: f64) -> StressState {
    let amp = 1.0 / (2.0 * std::f64::consts::PI * r).sqrt();
    let (sh, ch) = (theta / 2.0).sin_cos();
    let s3h = (1.5 * theta).sin();
    let c3h = (1.5 * theta).cos();
    let ai = k_i * amp;
    let aii = k_ii * amp;
    StressState {
        s11: ai * ch * (1.0 - sh * s3h) - aii * sh * (2.0 + ch * c3h),
        s22: ai * ch * (1.0 + sh * s3h) + aii * sh * ch * c3h,
        s12: ai * ch * sh * c3h + aii * ch * (1.0 - sh * s3h),
    }
}

/// A fully evaluated field point, used for CSV export and inspection.
#[derive(Debug, Clone, Copy)]
pub struct FieldSample {
    pub x: [f64; 2],
    pub u: [f64; 2],
    pub strain: (f64, f64, f64),
    pub stress: StressState,
    pub residual: (f64, f64),
}

impl FieldSample {
    /// Assemble every derived quantity from the displacement jets at `x`.
    pub fn from_jets(
        x: [f64; 2],
        u1: &SpatialJet,
        u2: &SpatialJet,
        material: &Material,
        body_force: [f64; 2],
    ) -> Self {
        let du = [[u1.gx, u1.gy], [u2.gx, u2.gy]];
        let strain = strain_from_gradient(du);
        let stress = stress_from_strain(strain, material);
        let residual = navier_residual(u1, u2, material, body_force);
        Self { x, u: [u1.value, u2.value], strain, stress, residual }
    }
}
