//! Truncated lattice sums with envelope tail bounds.
//!
//! Every summand handled here decays like `z^q e^{-s z^2}` in the lattice
//! coordinate `z`. The constant in front is measured on the terms already
//! summed (twice the largest observed ratio to the envelope), and the tail
//! beyond the last point is bounded by placing the remaining lattice points
//! at the minimal spacing.

use std::borrow::Cow;

use rug::Float;

use super::TruncationPolicy;
use crate::error::{Error, Result};
use crate::specfun::{bessel_zeros_with_bits, BesselZeroTable, DEFAULT_ZERO_BITS};

/// Minimal gap between consecutive zeros of `J_alpha`, `alpha > -1`.
pub(crate) const ZERO_SPACING: f64 = 2.5;

pub(crate) struct Envelope {
    /// Power `q_e` of each entry.
    pub exponents: Vec<f64>,
    /// Gaussian rate `s`.
    pub decay: f64,
    /// Lower bound on the gap between lattice points.
    pub spacing: f64,
}

pub(crate) struct LatticeSums {
    pub sums: Vec<Float>,
    /// `sum_n |term|` per entry.
    pub abs_sums: Vec<f64>,
    /// Bound on the omitted tail per entry.
    pub tails: Vec<f64>,
    pub n_terms: usize,
}

impl LatticeSums {
    /// Relative error bound per entry: tail plus accumulated rounding.
    pub fn rel_errors(&self, sum_bits: u32) -> Vec<f64> {
        let u = (-(sum_bits as f64)).exp2() * (self.n_terms as f64 + 1.0);
        self.sums
            .iter()
            .zip(&self.abs_sums)
            .zip(&self.tails)
            .map(|((s, &a), &t)| {
                let s = s.to_f64().abs();
                if s == 0.0 {
                    f64::INFINITY
                } else {
                    (t + u * a) / s
                }
            })
            .collect()
    }
}

fn ln_env(q: f64, s: f64, z: f64) -> f64 {
    q * z.ln() - s * z * z
}

/// `ln sum_{m>=1} e^{f(z0 + m d)}` for `f` decreasing beyond `z0`.
fn ln_decreasing_tail(q: f64, s: f64, z0: f64, d: f64) -> f64 {
    let mut acc = f64::NEG_INFINITY;
    let mut m = 1.0;
    loop {
        let v = ln_env(q, s, z0 + m * d);
        acc = log_add(acc, v);
        if v < acc - 60.0 || m > 1e7 {
            return acc;
        }
        m += 1.0;
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `ln` of a bound on `sum_{n > n*} z_n^q e^{-s z_n^2}` when the last summed
/// point is `z_last` and consecutive points are at least `d` apart.
fn ln_tail_envelope(q: f64, s: f64, z_last: f64, d: f64) -> f64 {
    let peak = if q > 0.0 { (q / (2.0 * s)).sqrt() } else { 0.0 };
    if z_last >= peak {
        ln_decreasing_tail(q, s, z_last, d)
    } else {
        // At most (peak - z_last)/d + 1 points lie before the peak, each
        // below the peak value.
        let before = ((peak - z_last) / d).floor() + 1.0;
        log_add(before.ln() + ln_env(q, s, peak), ln_decreasing_tail(q, s, peak, d))
    }
}

/// Sums `term(n)` over `n = 1, 2, ...` under `policy`. `term` returns the
/// lattice coordinate `z_n` and one summand per entry.
pub(crate) fn lattice_sum<F>(env: &Envelope, policy: &TruncationPolicy, bits: u32, mut term: F) -> Result<LatticeSums>
where
    F: FnMut(usize) -> Result<(f64, Vec<Float>)>,
{
    policy.validate()?;
    let k = env.exponents.len();
    let mut sums = vec![Float::new(bits); k];
    let mut abs_sums = vec![0.0f64; k];
    let mut ln_c = vec![f64::NEG_INFINITY; k];
    let q_max = env.exponents.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let peak = if q_max > 0.0 { (q_max / (2.0 * env.decay)).sqrt() } else { 0.0 };

    let (limit, tol) = match *policy {
        TruncationPolicy::FixedTerms { n_max } => (n_max, None),
        TruncationPolicy::TailTol { tail_tol, n_max_cap } => (n_max_cap, Some(tail_tol)),
    };
    let tails_at = |ln_c: &[f64], z: f64| -> Vec<f64> {
        env.exponents
            .iter()
            .zip(ln_c)
            .map(|(&q, &c)| {
                if c == f64::NEG_INFINITY {
                    0.0
                } else {
                    (c + ln_tail_envelope(q, env.decay, z, env.spacing)).exp()
                }
            })
            .collect()
    };

    let mut z = 0.0;
    for n in 1..=limit {
        let (zn, terms) = term(n)?;
        z = zn;
        for (e, t) in terms.into_iter().enumerate() {
            let a = t.to_f64().abs();
            if a > 0.0 {
                abs_sums[e] += a;
                let ln_a = Float::with_val(53, t.abs_ref()).ln().to_f64();
                let r = std::f64::consts::LN_2 + ln_a - ln_env(env.exponents[e], env.decay, zn);
                ln_c[e] = ln_c[e].max(r);
            }
            sums[e] += t;
        }
        if let Some(tol) = tol {
            // Need the envelope to be decreasing and a few points for the
            // constant to be meaningful.
            if zn > peak && n >= 3 {
                let tails = tails_at(&ln_c, zn);
                if tails.iter().zip(&abs_sums).all(|(&t, &a)| t <= tol * a) {
                    return Ok(LatticeSums {
                        sums,
                        abs_sums,
                        tails,
                        n_terms: n,
                    });
                }
            }
        }
    }
    if tol.is_some() {
        return Err(Error::Truncation(format!(
            "tail tolerance not reached within {limit} lattice points"
        )));
    }
    let tails = tails_at(&ln_c, z);
    Ok(LatticeSums {
        sums,
        abs_sums,
        tails,
        n_terms: limit,
    })
}

/// Zero table that grows on demand, borrowing a caller's table when it is
/// precise enough.
pub(crate) struct ZeroCursor<'a> {
    table: Cow<'a, BesselZeroTable>,
}

impl<'a> ZeroCursor<'a> {
    pub fn new(alpha: f64, bits: u32, shared: Option<&'a BesselZeroTable>) -> Result<Self> {
        let need_bits = (bits + 48).max(DEFAULT_ZERO_BITS);
        let table = match shared {
            Some(t) if t.alpha() == alpha && t.bits() >= need_bits => Cow::Borrowed(t),
            _ => Cow::Owned(bessel_zeros_with_bits(alpha, 32, 1e-14, need_bits)?),
        };
        Ok(Self { table })
    }

    /// `(x_n, J_{alpha+1}(x_n))`, 1-based.
    pub fn get(&mut self, n: usize) -> Result<(&Float, &Float)> {
        if n > self.table.count() {
            let target = (2 * self.table.count()).max(n);
            self.table.to_mut().extend_to(target)?;
        }
        Ok((&self.table.zeros()[n - 1], &self.table.j_next()[n - 1]))
    }
}
