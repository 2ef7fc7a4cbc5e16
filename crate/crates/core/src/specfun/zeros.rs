use std::f64::consts::PI;

use rug::Float;

use super::bessel_j::{bessel_j_mp, check_order};
use crate::error::{Error, Result};

/// Precision of tables built by [`bessel_zeros`].
pub const DEFAULT_ZERO_BITS: u32 = 160;

/// Scan step when bracketing a zero. Consecutive zeros of `J_alpha` are
/// more than 2.5 apart for every `alpha > -1`, so a sign change found on
/// this grid brackets exactly one zero.
const SCAN_STEP: f64 = 0.25;
const MIN_GAP: f64 = 2.5;

/// First positive zeros of `J_alpha`, with `J_{alpha+1}` at each zero.
#[derive(Debug, Clone)]
pub struct BesselZeroTable {
    alpha: f64,
    bits: u32,
    tol: f64,
    zeros: Vec<Float>,
    j_next: Vec<Float>,
    residuals: Vec<f64>,
    residual_bound: f64,
}

/// The first `count` positive zeros of `J_alpha` at [`DEFAULT_ZERO_BITS`].
///
/// `tol` certifies the table: every zero must satisfy
/// `|J_alpha(x_n)| <= tol * max(1, n)` or construction fails.
pub fn bessel_zeros(alpha: f64, count: usize, tol: f64) -> Result<BesselZeroTable> {
    bessel_zeros_with_bits(alpha, count, tol, DEFAULT_ZERO_BITS)
}

pub fn bessel_zeros_with_bits(alpha: f64, count: usize, tol: f64, bits: u32) -> Result<BesselZeroTable> {
    check_order(alpha)?;
    if count == 0 {
        return Err(Error::InvalidParams("zero count must be positive".into()));
    }
    if !(tol >= 1e-15) {
        return Err(Error::InvalidParams(format!("tol = {tol} is below 1e-15")));
    }
    let mut t = BesselZeroTable {
        alpha,
        bits,
        tol,
        zeros: Vec::new(),
        j_next: Vec::new(),
        residuals: Vec::new(),
        residual_bound: 0.0,
    };
    t.extend_to(count)?;
    Ok(t)
}

impl BesselZeroTable {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn count(&self) -> usize {
        self.zeros.len()
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// `max_n |J_alpha(x_n)|` over the table.
    pub fn residual_bound(&self) -> f64 {
        self.residual_bound
    }

    /// `|J_alpha(x_n)|` for each stored zero.
    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn zeros(&self) -> &[Float] {
        &self.zeros
    }

    /// `J_{alpha+1}(x_n)` for each stored zero.
    pub fn j_next(&self) -> &[Float] {
        &self.j_next
    }

    /// Zero `x_n`, 1-based.
    pub fn zero(&self, n: usize) -> &Float {
        &self.zeros[n - 1]
    }

    pub fn zeros_f64(&self) -> Vec<f64> {
        self.zeros.iter().map(Float::to_f64).collect()
    }

    /// Appends zeros until the table holds `count` of them.
    pub fn extend_to(&mut self, count: usize) -> Result<()> {
        let nu = Float::with_val(53, self.alpha);
        let wp = self.bits + 24;
        let nu1 = Float::with_val(54, &nu + 1u32);
        while self.zeros.len() < count {
            let n = self.zeros.len() + 1;
            let prev = self.zeros.last().map(|z| Float::with_val(wp, z));
            let x = find_zero(&nu, &nu1, n, prev.as_ref(), self.bits + 8, wp)?;
            // Residual at the stored (rounded) zero, evaluated at both the
            // working and the storage precision.
            let stored = Float::with_val(self.bits, &x);
            let res = bessel_j_mp(&nu, &stored, wp)?
                .to_f64()
                .abs()
                .max(bessel_j_mp(&nu, &stored, self.bits)?.to_f64().abs());
            if res > self.tol * (n as f64).max(1.0) {
                return Err(Error::Convergence(format!(
                    "zero {n} of J_{}: residual {res:e} exceeds tolerance {:e}",
                    self.alpha,
                    self.tol * (n as f64)
                )));
            }
            let jn = bessel_j_mp(&nu1, &x, self.bits)?;
            self.residual_bound = self.residual_bound.max(res);
            self.residuals.push(res);
            self.zeros.push(stored);
            self.j_next.push(jn);
        }
        Ok(())
    }

    /// A copy holding at least `count` zeros.
    pub fn extended(&self, count: usize) -> Result<Self> {
        let mut t = self.clone();
        t.extend_to(count)?;
        Ok(t)
    }
}

/// McMahon's large-index estimate of the `n`th zero.
pub fn mcmahon(alpha: f64, n: usize) -> f64 {
    let beta = (n as f64 + alpha / 2.0 - 0.25) * PI;
    let mu = 4.0 * alpha * alpha;
    let b8 = 8.0 * beta;
    beta - (mu - 1.0) / b8 - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * b8.powi(3))
}

fn sign_of(v: &Float) -> i32 {
    if v.is_zero() {
        0
    } else if v.is_sign_negative() {
        -1
    } else {
        1
    }
}

/// Zero `n` to a relative accuracy of `2^-target`, with `J` evaluated at
/// `wp > target` bits so the stopping test sits above the noise.
fn find_zero(nu: &Float, nu1: &Float, n: usize, prev: Option<&Float>, target: u32, wp: u32) -> Result<Float> {
    let alpha = nu.to_f64();
    let j = |x: &Float| bessel_j_mp(nu, x, wp);
    // J_alpha > 0 on (0, x_1) and alternates between consecutive zeros.
    let expected = if n % 2 == 1 { 1 } else { -1 };
    let start = match prev {
        None => 0.5 * ((alpha + 1.0) * (alpha + 5.0)).sqrt(),
        Some(p) => p.to_f64() + MIN_GAP,
    };
    let mut lo = Float::with_val(wp, start);
    let mut flo = j(&lo)?;
    if sign_of(&flo) != expected {
        return Err(Error::Convergence(format!(
            "zero {n} of J_{alpha}: unexpected sign at {start}, a zero would be skipped"
        )));
    }
    let mut hi;
    let mut fhi;
    let mut steps = 0;
    loop {
        hi = Float::with_val(wp, &lo + SCAN_STEP);
        fhi = j(&hi)?;
        if sign_of(&fhi) != expected {
            break;
        }
        lo = hi;
        flo = fhi;
        steps += 1;
        if steps > 10_000 {
            return Err(Error::Convergence(format!("zero {n} of J_{alpha}: no sign change found")));
        }
    }
    if fhi.is_zero() {
        return Ok(hi);
    }

    // Safeguarded Newton inside [lo, hi]; J' = (alpha/x) J - J_{alpha+1}.
    let guess = mcmahon(alpha, n);
    let mut x = if guess > lo.to_f64() && guess < hi.to_f64() {
        Float::with_val(wp, guess)
    } else {
        Float::with_val(wp, &lo + &hi) / 2u32
    };
    let slo = sign_of(&flo);
    for _ in 0..200 {
        let f = j(&x)?;
        if f.is_zero() {
            return Ok(x);
        }
        if sign_of(&f) == slo {
            lo = x.clone();
        } else {
            hi = x.clone();
        }
        let fp = Float::with_val(wp, nu / &x) * &f - bessel_j_mp(nu1, &x, wp)?;
        let step = Float::with_val(wp, &f / &fp);
        let tiny = Float::with_val(53, &x >> (target as i32));
        let mut next = Float::with_val(wp, &x - &step);
        if Float::with_val(53, step.abs_ref()) <= tiny && next >= lo && next <= hi {
            return Ok(next);
        }
        if !(next > lo && next < hi) {
            next = Float::with_val(wp, &lo + &hi) / 2u32;
        }
        x = next;
        if Float::with_val(53, &hi - &lo) <= tiny {
            return Ok(x);
        }
    }
    Err(Error::Convergence(format!(
        "zero {n} of J_{alpha}: Newton did not converge in [{}, {}]",
        lo.to_f64(),
        hi.to_f64()
    )))
}
