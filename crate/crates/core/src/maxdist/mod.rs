//! Analytic routes to `P(max_{0<t<1} b_N(t) < M)`.
//!
//! All prefactors are assembled in log space and exponentiated once; the
//! determinants go through [`crate::linalg_xp::det_report`], whose error
//! estimate is combined with the lattice tail bounds into
//! [`ProbabilityResult::est_error`].

pub(crate) mod lattice;
mod routes;
mod types;

pub use routes::{
    evaluate, hankel_sign_exponent, moments_mop, moments_mop_with, moments_single, moments_single_with,
    prob_brownian_excursion, prob_brownian_reflect, prob_pitman_yor, prob_pitman_yor_with, prob_thm1,
    prob_thm1_with, prob_thm2_hankel, prob_thm2_hankel_with,
};
pub use types::{ModelParams, MomentKind, MomentTable, ProbabilityResult, Route, TruncationPolicy};
