use rug::float::Constant;
use rug::Float;

use super::bessel_j::{check_order, crossover, hankel_terms};
use super::gamma::gamma_float;
use crate::error::{Error, Result};
use crate::linalg_xp::PrecisionConfig;

/// Modified Bessel function `I_alpha(x)` for `alpha > -1`, `x >= 0`.
///
/// Signals [`Error::Overflow`] when the value leaves the double range; use
/// [`bessel_i_scaled`] for large arguments.
pub fn bessel_i(alpha: f64, x: f64, precision: &PrecisionConfig) -> Result<Float> {
    check_inputs(alpha, x)?;
    let v = bessel_i_mp(&Float::with_val(53, alpha), &Float::with_val(53, x), precision.working_bits)?;
    if !v.to_f64().is_finite() {
        return Err(Error::Overflow(format!("I_{alpha}({x}) exceeds the double range")));
    }
    Ok(v)
}

/// `e^{-x} I_alpha(x)`.
pub fn bessel_i_scaled(alpha: f64, x: f64, precision: &PrecisionConfig) -> Result<Float> {
    check_inputs(alpha, x)?;
    bessel_i_scaled_mp(&Float::with_val(53, alpha), &Float::with_val(53, x), precision.working_bits)
}

fn check_inputs(alpha: f64, x: f64) -> Result<()> {
    check_order(alpha)?;
    if !(x.is_finite() && x >= 0.0) {
        return Err(Error::Domain(format!("argument x = {x} must be finite and >= 0")));
    }
    Ok(())
}

/// `I_nu(x)` at `bits` bits; `nu > -1`.
pub fn bessel_i_mp(nu: &Float, x: &Float, bits: u32) -> Result<Float> {
    let s = bessel_i_scaled_mp(nu, x, bits + 8)?;
    let e = Float::with_val(bits + 8, x).exp();
    let v = Float::with_val(bits, s * e);
    if v.is_infinite() {
        return Err(Error::Overflow(format!("I at x = {}", x.to_f64())));
    }
    Ok(v)
}

/// `e^{-x} I_nu(x)` at `bits` bits; `nu > -1`.
pub fn bessel_i_scaled_mp(nu: &Float, x: &Float, bits: u32) -> Result<Float> {
    if *nu <= -1 {
        return Err(Error::Domain(format!("order {} must exceed -1", nu.to_f64())));
    }
    if x.is_sign_negative() && !x.is_zero() {
        return Err(Error::Domain(format!("I at negative argument {}", x.to_f64())));
    }
    if x.is_zero() {
        return if nu.is_zero() {
            Ok(Float::with_val(bits, 1))
        } else if *nu > 0 {
            Ok(Float::new(bits))
        } else {
            Err(Error::Overflow(format!("I_{} is unbounded at 0", nu.to_f64())))
        };
    }
    let wp = bits + 16;
    if x.to_f64() > crossover(nu.to_f64(), bits) {
        if let Some(terms) = hankel_terms(nu, x, wp) {
            // e^{-x} I_nu(x) ~ (2 pi x)^{-1/2} sum_k (-1)^k a_k / x^k
            let mut sum = Float::new(wp);
            for (k, t) in terms.iter().enumerate() {
                if k % 2 == 0 {
                    sum += t;
                } else {
                    sum -= t;
                }
            }
            let pi2x = Float::with_val(wp, Constant::Pi) * Float::with_val(wp, x) * 2u32;
            return Ok(Float::with_val(bits, sum / pi2x.sqrt()));
        }
    }
    let s = i_series(nu, x, wp)?;
    let e = Float::with_val(wp, -Float::with_val(wp, x)).exp();
    Ok(Float::with_val(bits, s * e))
}

/// Positive-term series `(x/2)^nu sum_k (x^2/4)^k / (k! Gamma(nu + k + 1))`,
/// stopped once the geometric tail bound falls below `2^-wp` of the sum.
fn i_series(nu: &Float, x: &Float, wp: u32) -> Result<Float> {
    let nuw = Float::with_val(wp.max(nu.prec()), nu);
    let half = Float::with_val(wp, x) / 2u32;
    let q = Float::with_val(wp, half.square_ref());
    let lead = (Float::with_val(wp, half.ln_ref()) * &nuw).exp();
    let g = gamma_float(&Float::with_val(wp, &nuw + 1u32), wp)?;
    let mut term = lead / g;
    let mut sum = term.clone();
    let qf = q.to_f64();
    let nuf = nu.to_f64();
    let mut k = 1u32;
    loop {
        let kf = Float::with_val(wp, &nuw + k) * k;
        term *= &q;
        term /= kf;
        sum += &term;
        let r = qf / ((k as f64 + 1.0) * (nuf + k as f64 + 1.0));
        if r < 0.5 {
            let tail = Float::with_val(53, &term * (r / (1.0 - r)));
            if tail <= Float::with_val(53, &sum >> (wp as i32)) {
                break;
            }
        }
        k += 1;
        if k > 10_000_000 {
            return Err(Error::Convergence("I series did not converge".into()));
        }
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn p106() -> PrecisionConfig {
        PrecisionConfig::double_double()
    }

    #[test]
    fn minus_half_order_is_cosh() {
        for &x in &[0.5, 3.0] {
            let want = (2.0 / (PI * x)).sqrt() * x.cosh();
            let got = bessel_i(-0.5, x, &p106()).unwrap().to_f64();
            assert!(((got - want) / want).abs() < 1e-15, "{x}");
        }
    }

    #[test]
    fn minus_half_order_on_a_grid() {
        let mut x = 0.1;
        while x <= 40.0 {
            let want = (2.0 / (PI * x)).sqrt() * x.cosh();
            let got = bessel_i(-0.5, x, &p106()).unwrap().to_f64();
            assert!(((got - want) / want).abs() < 1e-13, "{x}");
            x += 0.173;
        }
    }

    #[test]
    fn value_at_origin() {
        assert_eq!(bessel_i(2.0, 0.0, &p106()).unwrap(), 0.0);
        assert_eq!(bessel_i(0.0, 0.0, &p106()).unwrap(), 1.0);
    }

    #[test]
    fn order_one_at_one_against_doubled_precision() {
        let p = p106();
        let got = bessel_i(1.0, 1.0, &p).unwrap();
        let nu = Float::with_val(53, 1);
        let x = Float::with_val(53, 1);
        let reference = i_series(&nu, &x, 2 * p.working_bits + 32).unwrap();
        let rel = Float::with_val(300, &got - &reference) / &reference;
        assert!(rel.to_f64().abs() < 1e-14);
        assert!((got.to_f64() - 0.565_159_103_992_485_f64).abs() < 1e-15);
    }

    #[test]
    fn scaled_variant_survives_large_arguments() {
        let p = p106();
        assert!(matches!(bessel_i(0.7, 800.0, &p), Err(Error::Overflow(_))));
        let s = bessel_i_scaled(0.7, 800.0, &p).unwrap().to_f64();
        let lead = 1.0 / (2.0 * PI * 800.0).sqrt();
        assert!((s / lead - 1.0).abs() < 1e-3);
    }

    #[test]
    fn asymptotic_matches_series_past_the_crossover() {
        let bits = 106;
        for &nu in &[-0.5, 0.0, 0.7, 3.2] {
            for &x in &[45.0, 70.0] {
                let nuf = Float::with_val(53, nu);
                let xf = Float::with_val(53, x);
                let a = bessel_i_scaled_mp(&nuf, &xf, bits).unwrap();
                let s = i_series(&nuf, &xf, bits + 16).unwrap() * Float::with_val(bits + 16, -x).exp();
                let rel = Float::with_val(bits, &a - &s) / &s;
                assert!(rel.to_f64().abs() < 1e-28, "{nu} {x}");
            }
        }
    }
}
