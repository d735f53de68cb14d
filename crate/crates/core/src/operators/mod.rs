//! Discrete spatial operators on a [`Grid`](crate::field::Grid).

mod fft;
mod fractional;
mod kernels;
mod local;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use fft::PaddedFft;
pub use fractional::{
    fractional_energy, fractional_laplacian, fractional_laplacian_padded, padded_multiplier, riesz_composition_error,
    sv_gap, sv_sides, CompositionError, SvSides,
};
pub use kernels::{
    gauss_legendre, grad_potential, interaction_gradient, riesz_potential, KernelCache, RieszKernel,
};
pub use local::{diffusion_term, dissipation_functional, dissipation_of};

/// Order `s ∈ (0, 1)` of `(−Δ)^s`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct FractionalOrder(f64);

impl FractionalOrder {
    pub fn new(s: f64) -> Result<Self> {
        if s > 0.0 && s < 1.0 {
            Ok(Self(s))
        } else {
            Err(Error::Domain(format!("fractional order must lie in (0, 1), got {s}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}
