//! Special functions at arbitrary precision: Gamma, `J_alpha`, `I_alpha`,
//! derivatives of `J_alpha` and certified zeros of `J_alpha`.

mod bessel_i;
mod bessel_j;
mod deriv;
mod gamma;
mod zeros;

pub use bessel_i::{bessel_i, bessel_i_mp, bessel_i_scaled, bessel_i_scaled_mp};
pub use bessel_j::{bessel_j, bessel_j_general, bessel_j_mp};
pub use deriv::{bessel_j_deriv, bessel_j_deriv_with_limit, bessel_j_derivs_mp, DerivCoeffs, DEFAULT_MAX_ORDER};
pub use gamma::{gamma_float, gamma_fn, gamma_lanczos, ln_gamma_float};
pub use zeros::{bessel_zeros, bessel_zeros_with_bits, mcmahon, BesselZeroTable, DEFAULT_ZERO_BITS};
