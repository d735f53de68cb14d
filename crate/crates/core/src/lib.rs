//! Finite-volume laboratory for the aggregation-diffusion equation
//! `ρ_t = Δρ^m + div(ρ∇(U∗ρ))` with attractive-repulsive power-law
//! potentials, together with the constants of its `L^p` bootstrap.

pub mod error;
pub mod estimates;
pub mod experiment;
pub mod field;
pub mod kernel_model;
pub mod monitor;
pub mod operators;
pub mod solver;
pub mod special;

pub use error::{Error, Result};
pub use experiment::{ExecuteError, Expect, ExperimentConfig, Mode, Trajectory};
pub use field::{init_profile, DensityField, Grid, InitialProfile, ProfileKind};
pub use kernel_model::{
    classify, interaction_laplacian_form, laplacian_mass_f, potential_value, repulsion_zero_r0,
    riesz_constant, DiffusionExponent, LaplacianForm, LaplacianTerm, PotentialParams, Regime,
    RegimeTag,
};
pub use monitor::{boundedness_verdict, NormSeries, Residual, Verdict, VerdictTag};
pub use solver::{RunOutcome, SimConfig, Solver, Termination};
