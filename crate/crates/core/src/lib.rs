//! Exact distribution of the maximal height of `N` non-intersecting Bessel
//! paths started at `a >= 0` and pinned to the origin at time one.
//!
//! The crate evaluates `P(max_{0<t<1} b_N(t) < M)` along several independent
//! routes:
//!
//! * [`maxdist::prob_thm1`]: determinant of lattice sums over the zeros of
//!   `J_alpha`, with derivatives `J_alpha^{(i-1)}` for a positive start.
//! * [`maxdist::prob_thm2_hankel`]: the same probability as a (block) Hankel
//!   determinant of discrete moments.
//! * [`maxdist::prob_brownian_reflect`] / [`maxdist::prob_brownian_excursion`]:
//!   the `alpha = -1/2` and `alpha = 1/2` theta-sum forms.
//! * [`maxdist::prob_pitman_yor`]: the single-path law.
//! * [`km_check`]: the Karlin-McGregor ratio at finite separation.
//! * [`mc_oracle`]: a Monte Carlo estimate for one path.
//!
//! All analytic work is carried out in MPFR floating point at a precision
//! chosen through [`PrecisionConfig`].

pub mod error;
pub mod km_check;
pub mod linalg_xp;
pub mod maxdist;
pub mod mc_oracle;
pub mod specfun;

pub use error::{Error, Result};
pub use linalg_xp::{PrecisionConfig, XMatrix};
pub use maxdist::{ModelParams, ProbabilityResult, Route, TruncationPolicy};
pub use specfun::BesselZeroTable;

/// Extended precision real used throughout the crate.
pub use rug::Float;
