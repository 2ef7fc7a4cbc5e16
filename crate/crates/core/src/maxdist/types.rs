use std::fmt;
use std::str::FromStr;

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `N` paths of a Bessel process of order `alpha`, started at `a`, with
/// wall height `M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n_paths: usize,
    pub alpha: f64,
    pub start: f64,
    pub wall: f64,
}

impl ModelParams {
    pub fn new(n_paths: usize, alpha: f64, start: f64, wall: f64) -> Result<Self> {
        let p = Self {
            n_paths,
            alpha,
            start,
            wall,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::InvalidParams("N must be at least 1".into()));
        }
        if !(self.alpha.is_finite() && self.alpha > -1.0) {
            return Err(Error::InvalidParams(format!("alpha = {} must exceed -1", self.alpha)));
        }
        if !(self.start.is_finite() && self.start >= 0.0) {
            return Err(Error::InvalidParams(format!("start a = {} must be >= 0", self.start)));
        }
        if !self.wall.is_finite() {
            return Err(Error::InvalidParams(format!("wall M = {} must be finite", self.wall)));
        }
        Ok(())
    }

    /// True when the wall is at or below the start, where the probability is 0.
    pub fn wall_not_above_start(&self) -> bool {
        self.wall <= self.start
    }
}

/// Where lattice sums over zeros (or integers) are cut off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum TruncationPolicy {
    /// Exactly `n_max` lattice points.
    FixedTerms { n_max: usize },
    /// Stop once the envelope bound on the remaining tail of every entry is
    /// below `tail_tol` times that entry's absolute mass, with at most
    /// `n_max_cap` lattice points.
    TailTol { tail_tol: f64, n_max_cap: usize },
}

impl TruncationPolicy {
    pub const DEFAULT_TAIL_TOL: f64 = 1e-18;
    pub const DEFAULT_CAP: usize = 5000;

    pub fn fixed(n_max: usize) -> Self {
        Self::FixedTerms { n_max }
    }

    pub fn tail_tol(tail_tol: f64) -> Self {
        Self::TailTol {
            tail_tol,
            n_max_cap: Self::DEFAULT_CAP,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::FixedTerms { n_max: 0 } => {
                Err(Error::InvalidParams("n_max must be positive".into()))
            }
            Self::TailTol { tail_tol, n_max_cap } if !(tail_tol > 0.0 && tail_tol < 1.0) || n_max_cap == 0 => {
                Err(Error::InvalidParams(format!("tail_tol = {tail_tol} must lie in (0, 1)")))
            }
            _ => Ok(()),
        }
    }

    /// The same policy with twice as many terms (fixed) or a hundredfold
    /// tighter tolerance (adaptive).
    pub fn refined(&self) -> Self {
        match *self {
            Self::FixedTerms { n_max } => Self::FixedTerms { n_max: 2 * n_max },
            Self::TailTol { tail_tol, n_max_cap } => Self::TailTol {
                tail_tol: tail_tol * 1e-2,
                n_max_cap: 2 * n_max_cap,
            },
        }
    }
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self::tail_tol(Self::DEFAULT_TAIL_TOL)
    }
}

impl fmt::Display for TruncationPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::FixedTerms { n_max } => write!(f, "fixed_terms(n_max={n_max})"),
            Self::TailTol { tail_tol, n_max_cap } => write!(f, "tail_tol({tail_tol:e}, cap={n_max_cap})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Thm1,
    Thm2Hankel,
    BrownianReflect,
    BrownianExcursion,
    PitmanYor,
}

impl Route {
    pub const ALL: [Route; 5] = [
        Route::Thm1,
        Route::Thm2Hankel,
        Route::BrownianReflect,
        Route::BrownianExcursion,
        Route::PitmanYor,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Route::Thm1 => "thm1",
            Route::Thm2Hankel => "thm2_hankel",
            Route::BrownianReflect => "brownian_reflect",
            Route::BrownianExcursion => "brownian_excursion",
            Route::PitmanYor => "pitman_yor",
        }
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Route {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        match norm.as_str() {
            "thm1" => Ok(Route::Thm1),
            "thm2" | "thm2_hankel" | "hankel" => Ok(Route::Thm2Hankel),
            "brownian_reflect" | "reflect" => Ok(Route::BrownianReflect),
            "brownian_excursion" | "excursion" => Ok(Route::BrownianExcursion),
            "pitman_yor" | "pitman" => Ok(Route::PitmanYor),
            _ => Err(Error::InvalidParams(format!("unknown route '{s}'"))),
        }
    }
}

/// A probability with the route that produced it and an error estimate.
///
/// `value` is the raw number; it is not clamped to `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityResult {
    pub value: f64,
    /// `ln |value|`, useful when `value` underflows.
    pub log_abs: f64,
    pub sign: i8,
    pub route: Route,
    /// Truncation bound plus the determinant error estimate, absolute.
    pub est_error: f64,
    /// Absolute contribution of the lattice tails to `est_error`.
    pub truncation_error: f64,
    /// Absolute contribution of rounding in the determinant.
    pub rounding_error: f64,
    pub n_terms_used: usize,
    pub precision_bits: u32,
    /// Conditioning diagnostic of the determinant (0 for plain sums).
    pub condition: f64,
    pub note: Option<String>,
}

impl ProbabilityResult {
    pub(crate) fn exact_zero(route: Route, bits: u32, note: &str) -> Self {
        Self {
            value: 0.0,
            log_abs: f64::NEG_INFINITY,
            sign: 0,
            route,
            est_error: 0.0,
            truncation_error: 0.0,
            rounding_error: 0.0,
            n_terms_used: 0,
            precision_bits: bits,
            condition: 0.0,
            note: Some(note.to_string()),
        }
    }

    /// Value clamped to `[0, 1]` for presentation.
    pub fn clamped(&self) -> f64 {
        self.value.clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentKind {
    MopPair,
    Single,
}

/// Discrete moments on the squared-zero lattice.
#[derive(Debug, Clone)]
pub struct MomentTable {
    pub kind: MomentKind,
    /// `m_k^{(1)}` (pair kind).
    pub m1: Vec<Float>,
    /// `m_k^{(2)}` (pair kind).
    pub m2: Vec<Float>,
    /// `m~_k` (single kind).
    pub mt: Vec<Float>,
    pub k_max: usize,
    pub truncation: TruncationPolicy,
    pub n_terms_used: usize,
    /// Relative error bound of each moment, in the order `m1`, `m2`, `mt`.
    pub rel_err: Vec<f64>,
}
