use rug::float::Constant;
use rug::Float;

use super::gamma::gamma_float;
use crate::error::{Error, Result};
use crate::linalg_xp::PrecisionConfig;

/// Bessel function of the first kind `J_alpha(x)` for `alpha > -1`, `x >= 0`.
///
/// Power series below a precision dependent crossover, Hankel's
/// large-argument expansion above it. Relative accuracy is the working
/// precision away from zeros; near a zero the error is absolute, at the
/// scale `2^-bits * max(1, x^-1/2)`.
pub fn bessel_j(alpha: f64, x: f64, precision: &PrecisionConfig) -> Result<Float> {
    check_order(alpha)?;
    check_arg(x)?;
    let bits = precision.working_bits;
    bessel_j_mp(&Float::with_val(53, alpha), &Float::with_val(53, x), bits)
}

/// `J_nu(x)` for any real order. Negative integer orders use
/// `J_{-m} = (-1)^m J_m`; other negative orders diverge at the origin.
pub fn bessel_j_general(nu: f64, x: f64, precision: &PrecisionConfig) -> Result<Float> {
    if !nu.is_finite() {
        return Err(Error::Domain(format!("order {nu}")));
    }
    check_arg(x)?;
    bessel_j_mp(&Float::with_val(53, nu), &Float::with_val(53, x), precision.working_bits)
}

pub(crate) fn check_order(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > -1.0) {
        return Err(Error::Domain(format!("order alpha = {alpha} must exceed -1")));
    }
    Ok(())
}

fn check_arg(x: f64) -> Result<()> {
    if !(x.is_finite() && x >= 0.0) {
        return Err(Error::Domain(format!("argument x = {x} must be finite and >= 0")));
    }
    Ok(())
}

/// Argument above which the asymptotic expansion reaches `bits` bits.
pub(crate) fn crossover(nu: f64, bits: u32) -> f64 {
    (0.35 * (bits as f64 + 16.0)).max(2.0 * nu.abs()).max(12.0)
}

/// `J_nu(x)` at `bits` bits of precision for extended precision inputs.
pub fn bessel_j_mp(nu: &Float, x: &Float, bits: u32) -> Result<Float> {
    if x.is_sign_negative() && !x.is_zero() {
        return Err(Error::Domain(format!("J at negative argument {}", x.to_f64())));
    }
    if nu.is_sign_negative() && nu.is_integer() {
        let m = Float::with_val(nu.prec(), -nu);
        let odd = m.to_integer().is_some_and(|m| m.is_odd());
        let j = bessel_j_mp(&m, x, bits)?;
        return Ok(if odd { -j } else { j });
    }
    if x.is_zero() {
        return if nu.is_zero() {
            Ok(Float::with_val(bits, 1))
        } else if *nu > 0 {
            Ok(Float::new(bits))
        } else {
            Err(Error::Overflow(format!("J_{} is unbounded at 0", nu.to_f64())))
        };
    }
    let xf = x.to_f64();
    if xf > crossover(nu.to_f64(), bits) {
        if let Some(j) = j_asymptotic(nu, x, bits + 16) {
            return Ok(Float::with_val(bits, j));
        }
    }
    Ok(Float::with_val(bits, j_series(nu, x, bits)?))
}

/// Power series `(x/2)^nu sum_k (-x^2/4)^k / (k! Gamma(nu + k + 1))`.
///
/// The largest term is about `e^x` times the result, so the sum runs with
/// that many extra bits.
fn j_series(nu: &Float, x: &Float, bits: u32) -> Result<Float> {
    let xf = x.to_f64();
    let est_terms = (xf * 1.5 + bits as f64 / 2.0 + 8.0).max(8.0);
    let guard = (std::f64::consts::LOG2_E * xf).ceil() as u32 + 16 + est_terms.log2().ceil() as u32;
    let wp = bits + guard;
    let nuw = Float::with_val(wp.max(nu.prec()), nu);
    let half = Float::with_val(wp, x) / 2u32;
    let q = -Float::with_val(wp, half.square_ref());
    let lead = (Float::with_val(wp, half.ln_ref()) * &nuw).exp();
    let g = gamma_float(&Float::with_val(wp, &nuw + 1u32), wp)?;
    let mut term = lead / g;
    let mut sum = term.clone();
    let mut max_abs = Float::with_val(53, term.abs_ref());
    let q4 = xf * xf / 4.0;
    let mut k = 1u32;
    loop {
        let kf = Float::with_val(wp, &nuw + k) * k;
        term *= &q;
        term /= kf;
        sum += &term;
        let a = Float::with_val(53, term.abs_ref());
        if a > max_abs {
            max_abs = a.clone();
        }
        let decreasing = (k as f64) * (nu.to_f64() + k as f64) > q4;
        if decreasing && (a.is_zero() || a < Float::with_val(53, &max_abs >> (wp as i32))) {
            break;
        }
        k += 1;
        if k > 1_000_000 {
            return Err(Error::Convergence("J series did not converge".into()));
        }
    }
    Ok(sum)
}

/// Terms `t_k = a_k(nu) / x^k` of Hankel's expansion, with
/// `a_k = prod_{j<=k} (4 nu^2 - (2j - 1)^2) / (k! 8^k)`, down to `2^-wp`.
/// `None` if the terms start growing first.
pub(crate) fn hankel_terms(nu: &Float, x: &Float, wp: u32) -> Option<Vec<Float>> {
    let mu = Float::with_val(wp, nu.square_ref()) * 4u32;
    let eightx = Float::with_val(wp, x) * 8u32;
    let mut t = Float::with_val(wp, 1);
    let mut out = vec![t.clone()];
    let mut prev = Float::with_val(53, 1);
    let eps = Float::with_val(53, 1) >> (wp as i32);
    let muf = mu.to_f64();
    for k in 1u32..10_000 {
        let odd = (2 * k - 1) as f64;
        t *= Float::with_val(wp, &mu - odd * odd);
        t /= Float::with_val(wp, &eightx * k);
        out.push(t.clone());
        let a = Float::with_val(53, t.abs_ref());
        if a.is_zero() || a < eps {
            return Some(out);
        }
        if a > prev && odd * odd > muf {
            return None;
        }
        prev = a;
    }
    None
}

/// `J_nu(x) = sqrt(2 / (pi x)) (P cos chi - Q sin chi)`, `chi = x - (nu/2 + 1/4) pi`.
fn j_asymptotic(nu: &Float, x: &Float, wp: u32) -> Option<Float> {
    let terms = hankel_terms(nu, x, wp)?;
    let mut p = Float::new(wp);
    let mut q = Float::new(wp);
    for (m, t) in terms.iter().enumerate() {
        let neg = (m / 2) % 2 == 1;
        let acc = if m % 2 == 0 { &mut p } else { &mut q };
        if neg {
            *acc -= t;
        } else {
            *acc += t;
        }
    }
    let extra = x.to_f64().log2().ceil().max(0.0) as u32 + 8;
    let pw = wp + extra;
    let pi = Float::with_val(pw, Constant::Pi);
    let phase = (Float::with_val(pw, nu) / 2u32 + 0.25f64) * &pi;
    let chi = Float::with_val(pw, x) - phase;
    let (s, c) = chi.sin_cos(Float::new(pw));
    let amp = (Float::with_val(wp, 2u32) / (pi * Float::with_val(pw, x))).sqrt();
    Some(amp * (p * c - q * s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn p106() -> PrecisionConfig {
        PrecisionConfig::double_double()
    }

    fn j(alpha: f64, x: f64) -> f64 {
        bessel_j(alpha, x, &p106()).unwrap().to_f64()
    }

    #[test]
    fn half_order_is_elementary() {
        for &x in &[1.0, 2.5, 10.0] {
            let want = (2.0 / (PI * x)).sqrt() * x.sin();
            assert!(((j(0.5, x) - want) / want).abs() < 1e-14, "{x}");
        }
    }

    #[test]
    fn half_integer_closed_forms_on_a_grid() {
        let mut x = 0.1;
        while x <= 40.0 {
            let s = (2.0 / (PI * x)).sqrt();
            let want_p = s * x.sin();
            let want_m = s * x.cos();
            let got_p = j(0.5, x);
            let got_m = j(-0.5, x);
            assert!((got_p - want_p).abs() <= 1e-13 * want_p.abs().max(1e-300) + 2e-16 * s, "{x}");
            assert!((got_m - want_m).abs() <= 1e-13 * want_m.abs().max(1e-300) + 2e-16 * s, "{x}");
            x += 0.137;
        }
    }

    #[test]
    fn value_at_origin() {
        assert_eq!(j(0.0, 0.0), 1.0);
        assert_eq!(j(1.3, 0.0), 0.0);
        assert!(bessel_j(-0.5, 0.0, &p106()).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(bessel_j(0.0, -1.0, &p106()), Err(Error::Domain(_))));
        assert!(bessel_j(-1.0, 1.0, &p106()).is_err());
    }

    #[test]
    fn first_zero_of_order_zero() {
        assert!(j(0.0, 2.404825557695773).abs() < 1e-13);
    }

    #[test]
    fn series_and_asymptotic_agree_across_the_crossover() {
        let bits = 106;
        let cases = [(-0.7, 45.0), (0.0, 45.0), (1.0, 60.0), (2.7, 45.0), (2.7, 90.0), (11.0, 90.0)];
        for &(nu, x) in &cases {
            let nuf = Float::with_val(53, nu);
            let xf = Float::with_val(53, x);
            let s = j_series(&nuf, &xf, bits).unwrap();
            let a = j_asymptotic(&nuf, &xf, bits + 16).unwrap();
            let scale = (2.0 / (PI * x)).sqrt();
            let d = Float::with_val(bits, &s - &a).to_f64().abs();
            assert!(d < 1e-28 * scale, "nu {nu} x {x}: {d}");
        }
    }

    #[test]
    fn agrees_with_mpfr_integer_orders() {
        for &x in &[0.3, 1.0, 7.5, 19.0, 33.0, 250.0, 5000.5] {
            for n in 0..3 {
                let ours = bessel_j(n as f64, x, &p106()).unwrap();
                let reference = Float::with_val(200, x).jn(n);
                let d = Float::with_val(200, &ours - &reference).to_f64().abs();
                let scale = x.powf(-0.5).max(1.0);
                assert!(d < 1e-28 * scale, "n {n} x {x}: {d}");
            }
        }
    }

    #[test]
    fn negative_integer_order_reflection() {
        let p = p106();
        let a = bessel_j_general(-3.0, 2.2, &p).unwrap().to_f64();
        let b = bessel_j_general(3.0, 2.2, &p).unwrap().to_f64();
        assert_eq!(a, -b);
    }

    #[test]
    fn three_term_recurrence() {
        // J_{nu-1} + J_{nu+1} = (2 nu / x) J_nu
        let p = p106();
        for &nu in &[-1.5, -0.5, 0.3, 2.7] {
            for &x in &[0.4, 3.0, 17.0, 80.0] {
                let jm = bessel_j_general(nu - 1.0, x, &p).unwrap().to_f64();
                let jp = bessel_j_general(nu + 1.0, x, &p).unwrap().to_f64();
                let j0 = bessel_j_general(nu, x, &p).unwrap().to_f64();
                let lhs = jm + jp;
                let rhs = 2.0 * nu / x * j0;
                assert!((lhs - rhs).abs() < 1e-14 * (jm.abs() + jp.abs()).max(1e-3), "{nu} {x}");
            }
        }
    }
}
