//! Meshless solver for two-dimensional linear-elastic fracture problems.
//!
//! `fracpinn` trains crack-tip-enriched physics-informed neural networks on
//! collocation points of a cracked body and extracts stress intensity
//! factors from the trained displacement field. The displacement ansatz is a
//! small fully-connected network per subdomain plus the leading singular
//! near-tip terms with trainable coefficients, so the `r^(−1/2)` stress
//! singularity is represented exactly and no nodal refinement is needed at
//! the tip.
//!
//! The crate is organized around the solver pipeline:
//!
//! - [`elasticity`]: plane strain/stress constitutive law, equilibrium
//!   residuals and the closed-form near-tip reference fields.
//! - [`network`]: the raw displacement networks and activations.
//! - [`kinematics`]: crack-tip frames, branch-cut-aware polar coordinates
//!   and the enrichment terms.
//! - [`autodiff`]: exact spatial jets (value, gradient, Hessian) and exact
//!   parameter gradients of the training loss.
//! - [`geometry`]: subdomain polygons, boundary conditions and collocation
//!   sampling.
//! - [`training`]: composite loss assembly and the Adam → L-BFGS training
//!   loop.
//! - [`sif`]: crack-opening-displacement SIF estimates and displacement
//!   extrapolation.
//! - [`benchmarks`]: the four built-in verification problems with reference
//!   solutions.
//! - [`config`], [`io`], [`cli`]: run configuration, file formats and the
//!   command-line front end.
//!
//! A narrative guide with runnable examples lives in `book/` at the
//! repository root (`mdbook build book`); its code snippets are compiled and
//! run as doctests through the [`guide`] module.

pub mod autodiff;
pub mod benchmarks;
pub mod cli;
pub mod config;
pub mod elasticity;
pub mod geometry;
pub mod guide;
pub mod io;
pub mod kinematics;
pub mod network;
pub mod sif;
pub mod training;

mod optimizer;

pub use elasticity::{Material, PlaneAssumption};
pub use kinematics::{CrackTip, EnrichedModel};
pub use network::ActivationKind;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid material: {0}")]
    InvalidMaterial(String),

    #[error("normal is not unit length (|n| = {length})")]
    NonUnitNormal { length: f64 },

    #[error("invalid architecture: {hidden_layers} hidden layers × {neurons_per_layer} neurons")]
    InvalidArchitecture { hidden_layers: usize, neurons_per_layer: usize },

    #[error("point within the tip exclusion radius (r = {r:.3e}, eps_tip = {eps_tip:.3e})")]
    AtTip { r: f64, eps_tip: f64 },

    #[error("point ({}, {}) lies on the branch cut behind a tip and carries no subdomain side tag", .x[0], .x[1])]
    AmbiguousCut { x: [f64; 2] },

    #[error("point ({}, {}) is outside subdomain {subdomain}", .x[0], .x[1])]
    OutsideSubdomain { subdomain: usize, x: [f64; 2] },

    #[error("non-finite value in {context}")]
    NonFinite { context: String },

    #[error("empty sample set: {0}")]
    EmptySamples(String),

    #[error("mismatched interface segments: {0}")]
    MismatchedInterface(String),

    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("distance behind the tip exceeds the crack face (r = {r}, face length = {max})")]
    OffCrack { r: f64, max: f64 },

    #[error("training diverged: loss non-finite for {steps} consecutive steps at iteration {iteration}")]
    Divergence { iteration: usize, steps: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("unknown benchmark '{id}' (valid: {valid})")]
    UnknownBenchmark { id: String, valid: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
