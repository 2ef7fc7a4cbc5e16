use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Working precision contract shared by every determinant route.
///
/// `working_bits` is 53 (double), 106 (double-double) or any value in
/// `200..=4096`. Evaluations whose estimated rounding error exceeds
/// `max_condition_warn` double-precision ulps are retried at twice the
/// precision when `auto_retry` is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecisionConfig {
    pub working_bits: u32,
    pub max_condition_warn: f64,
    pub auto_retry: bool,
}

impl PrecisionConfig {
    pub const DOUBLE: u32 = 53;
    pub const DOUBLE_DOUBLE: u32 = 106;
    pub const MIN_ARBITRARY: u32 = 200;
    pub const MAX_BITS: u32 = 4096;
    pub const DEFAULT_CONDITION_WARN: f64 = 1e4;

    pub fn new(working_bits: u32) -> Result<Self> {
        if !Self::is_valid_bits(working_bits) {
            return Err(Error::Precision(format!(
                "working_bits = {working_bits}; expected 53, 106 or 200..=4096"
            )));
        }
        Ok(Self {
            working_bits,
            max_condition_warn: Self::DEFAULT_CONDITION_WARN,
            auto_retry: true,
        })
    }

    pub fn double() -> Self {
        Self::new(Self::DOUBLE).expect("53 bits is valid")
    }

    pub fn double_double() -> Self {
        Self::new(Self::DOUBLE_DOUBLE).expect("106 bits is valid")
    }

    pub fn is_valid_bits(bits: u32) -> bool {
        bits == Self::DOUBLE
            || bits == Self::DOUBLE_DOUBLE
            || (Self::MIN_ARBITRARY..=Self::MAX_BITS).contains(&bits)
    }

    pub fn with_auto_retry(mut self, on: bool) -> Self {
        self.auto_retry = on;
        self
    }

    pub fn with_condition_warn(mut self, warn: f64) -> Self {
        self.max_condition_warn = warn;
        self
    }

    /// Next admissible precision at twice the bits, if any.
    pub fn doubled(&self) -> Option<Self> {
        let bits = self.working_bits.checked_mul(2)?;
        if bits > Self::MAX_BITS {
            return None;
        }
        Some(Self {
            working_bits: bits,
            ..*self
        })
    }

    /// Unit roundoff `2^-bits`.
    pub fn unit_roundoff(&self) -> f64 {
        (-(self.working_bits as f64)).exp2()
    }

    /// Relative error above which a result is considered under-resolved.
    pub fn error_budget(&self) -> f64 {
        self.max_condition_warn * f64::EPSILON / 2.0
    }

    pub fn bits(&self) -> u32 {
        self.working_bits
    }

    /// Precision with `extra` guard bits on top of the working precision.
    pub fn guarded(&self, extra: u32) -> u32 {
        self.working_bits + extra
    }

    pub fn float(&self, v: f64) -> Float {
        Float::with_val(self.working_bits, v)
    }
}

impl Default for PrecisionConfig {
    fn default() -> Self {
        Self::double_double()
    }
}
