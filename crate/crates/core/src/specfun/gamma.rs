use std::f64::consts::PI;
use std::sync::Mutex;

use rug::float::Constant;
use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};
use crate::linalg_xp::PrecisionConfig;

/// Gamma function at the working precision.
///
/// Stirling's series with an upward argument shift, reflection below 1/2.
/// The result is computed with guard bits and rounded once, so it sits
/// within one ulp of the true value at `precision.working_bits`.
pub fn gamma_fn(x: f64, precision: &PrecisionConfig) -> Result<Float> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("gamma of {x}")));
    }
    gamma_float(&Float::with_val(53, x), precision.working_bits)
}

/// Gamma of an extended precision argument, rounded to `bits`.
pub fn gamma_float(x: &Float, bits: u32) -> Result<Float> {
    if x.is_zero() || (x.is_sign_negative() && x.is_integer()) {
        return Err(Error::Pole(x.to_f64()));
    }
    if !x.is_finite() {
        return Err(Error::Domain(format!("gamma of {}", x.to_f64())));
    }
    let wp = bits + 24 + magnitude_bits(x);
    let xw = Float::with_val(wp.max(x.prec()), x);
    let g = if xw < 0.5 {
        // Gamma(x) = pi / (sin(pi x) Gamma(1 - x)), with sin(pi x) formed
        // from the exact distance to the nearest integer.
        let k = Float::with_val(wp, xw.round_ref());
        let delta = Float::with_val(xw.prec().max(wp), &xw - &k);
        let pi = Float::with_val(wp, Constant::Pi);
        let mut s = Float::with_val(wp, &delta * &pi).sin();
        if k.to_integer().is_some_and(|k| k.is_odd()) {
            s = -s;
        }
        let one_minus = Float::with_val(wp, 1 - &xw);
        let gm = stirling_gamma(&one_minus, wp);
        pi / (s * gm)
    } else {
        stirling_gamma(&xw, wp)
    };
    Ok(Float::with_val(bits, g))
}

/// `ln Gamma(x)` for `x > 0`.
pub fn ln_gamma_float(x: &Float, bits: u32) -> Result<Float> {
    if !(x.is_finite() && *x > 0) {
        return Err(Error::Domain(format!("ln_gamma of {}", x.to_f64())));
    }
    let wp = bits + 24 + magnitude_bits(x);
    let xw = Float::with_val(wp.max(x.prec()), x);
    Ok(Float::with_val(bits, stirling_ln_gamma(&xw, wp)))
}

/// Lanczos approximation in double precision (g = 607/128, 15 terms).
///
/// Kept as an independent cross-check of the Stirling path; it is good to
/// a few ulp rather than the one-ulp contract of [`gamma_fn`].
pub fn gamma_lanczos(x: f64) -> f64 {
    const G: f64 = 607.0 / 128.0;
    const C: [f64; 15] = [
        0.999_999_999_999_997_1,
        57.156_235_665_862_92,
        -59.597_960_355_475_49,
        14.136_097_974_741_747,
        -0.491_913_816_097_620_2,
        0.339_946_499_848_118_9e-4,
        0.465_236_289_270_485_76e-4,
        -0.983_744_753_048_795_6e-4,
        0.158_088_703_224_912_5e-3,
        -0.210_264_441_724_104_88e-3,
        0.217_439_618_115_212_64e-3,
        -0.164_318_106_536_763_9e-3,
        0.844_182_239_838_527_4e-4,
        -0.261_908_384_015_814_1e-4,
        0.368_991_826_595_316_2e-5,
    ];
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma_lanczos(1.0 - x));
    }
    let z = x - 1.0;
    let t = z + G + 0.5;
    let mut a = C[0];
    for (k, c) in C.iter().enumerate().skip(1) {
        a += c / (z + k as f64);
    }
    (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * a
}

/// Extra bits so that the absolute error of `ln Gamma(x)` still
/// translates into a relative error of `Gamma(x)` at the target precision.
fn magnitude_bits(x: &Float) -> u32 {
    let a = x.to_f64().abs().max(1.0);
    let lg = a * a.ln() + 1.0;
    lg.log2().ceil().max(0.0) as u32 + 1
}

fn stirling_gamma(x: &Float, wp: u32) -> Float {
    stirling_ln_gamma(x, wp).exp()
}

/// `ln Gamma(x)` for `x >= 1/2` at `wp` bits.
fn stirling_ln_gamma(x: &Float, wp: u32) -> Float {
    let zmin = (wp as f64).max(16.0);
    let shift = (zmin - x.to_f64()).ceil().max(0.0) as u32;
    let mut z = Float::with_val(wp, x);
    let mut prod = Float::with_val(wp, 1);
    for _ in 0..shift {
        prod *= &z;
        z += 1;
    }

    let half_ln_2pi = Float::with_val(wp, Constant::Pi) * 2u32;
    let half_ln_2pi = half_ln_2pi.ln() / 2u32;
    let lnz = Float::with_val(wp, z.ln_ref());
    let mut s = Float::with_val(wp, &z - 0.5f64) * &lnz - &z + half_ln_2pi;

    let z2 = Float::with_val(wp, z.square_ref());
    let mut zpow = z.clone();
    let eps = Float::with_val(wp, 1) >> (wp as i32);
    let mut k = 1usize;
    loop {
        let need = k.next_power_of_two().max(16);
        let b2k = bernoulli_2k(k, need);
        let term = Float::with_val(wp, &b2k) / (2 * k as u32 * (2 * k as u32 - 1)) / &zpow;
        let small = Float::with_val(53, term.abs_ref()) < eps;
        s += term;
        if small {
            break;
        }
        zpow *= &z2;
        k += 1;
    }
    s - prod.ln()
}

static BERNOULLI: Mutex<Vec<Rational>> = Mutex::new(Vec::new());

/// `B_{2k}` for `k >= 1`, keeping at least `reserve` values cached.
fn bernoulli_2k(k: usize, reserve: usize) -> Rational {
    let mut table = BERNOULLI.lock().unwrap_or_else(|e| e.into_inner());
    if table.len() < k {
        *table = bernoulli_table(reserve.max(k));
    }
    table[k - 1].clone()
}

/// `B_2, B_4, ..., B_{2n}` from the tangent numbers,
/// `B_{2k} = (-1)^{k-1} 2k T_k / (4^k (4^k - 1))`.
fn bernoulli_table(n: usize) -> Vec<Rational> {
    let mut t = vec![Integer::new(); n + 1];
    t[1] = Integer::from(1);
    for k in 2..=n {
        t[k] = Integer::from(&t[k - 1] * (k as u32 - 1));
    }
    for k in 2..=n {
        for j in k..=n {
            let a = Integer::from(&t[j - 1] * (j - k) as u32);
            let b = Integer::from(&t[j] * (j - k + 2) as u32);
            t[j] = a + b;
        }
    }
    (1..=n)
        .map(|k| {
            let four_k = Integer::from(1) << (2 * k as u32);
            let den = Integer::from(&four_k - 1) * four_k;
            let num = Integer::from(&t[k] * (2 * k as u32));
            let r = Rational::from((num, den));
            if k % 2 == 0 {
                -r
            } else {
                r
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(bits: u32) -> PrecisionConfig {
        PrecisionConfig::new(bits).unwrap()
    }

    #[test]
    fn bernoulli_numbers() {
        let b = bernoulli_table(5);
        let want = [(1, 6), (-1, 30), (1, 42), (-1, 30), (5, 66)];
        for (got, (n, d)) in b.iter().zip(want) {
            assert_eq!(*got, Rational::from((n, d)));
        }
    }

    #[test]
    fn unit_and_half() {
        assert_eq!(gamma_fn(1.0, &p(53)).unwrap(), 1.0);
        let sqrt_pi = Float::with_val(200, Constant::Pi).sqrt();
        let g = gamma_fn(0.5, &p(200)).unwrap();
        let rel = Float::with_val(200, &g - &sqrt_pi) / &sqrt_pi;
        assert!(rel.to_f64().abs() < 1e-58);
    }

    #[test]
    fn factorials() {
        let mut f = 1.0;
        for n in 1..20 {
            f *= n as f64;
            let g = gamma_fn(n as f64 + 1.0, &p(106)).unwrap();
            assert_eq!(g.to_f64(), f, "{n}!");
        }
    }

    #[test]
    fn poles_are_errors() {
        for x in [0.0, -1.0, -7.0] {
            assert!(matches!(gamma_fn(x, &p(53)), Err(Error::Pole(_))));
        }
    }

    #[test]
    fn negative_arguments_by_reflection() {
        // Gamma(-1/2) = -2 sqrt(pi)
        let g = gamma_fn(-0.5, &p(106)).unwrap().to_f64();
        assert!((g + 2.0 * PI.sqrt()).abs() < 1e-15);
        let g = gamma_fn(-2.5, &p(106)).unwrap().to_f64();
        assert!((g - (-8.0 / 15.0) * PI.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn agrees_with_mpfr_gamma() {
        for bits in [53u32, 106, 212, 500] {
            for &x in &[0.1, 0.5, 0.999, 1.5, 2.7, 7.3, 13.25, 50.5, 170.3, -0.3, -3.7] {
                let ours = gamma_fn(x, &p(bits)).unwrap();
                let reference = Float::with_val(bits + 64, x).gamma();
                let err = Float::with_val(bits + 64, &ours - &reference) / &reference;
                let ulps = err.to_f64().abs() * 2f64.powi(bits as i32);
                assert!(ulps <= 2.0, "x = {x}, bits = {bits}, {ulps} ulp");
            }
        }
    }

    #[test]
    fn lanczos_cross_check() {
        let s = gamma_fn(7.3, &p(106)).unwrap().to_f64();
        let l = gamma_lanczos(7.3);
        assert!(((s - l) / s).abs() < 1e-14);
        for &x in &[0.25, 1.5, 3.3, 9.9, 20.1] {
            let s = gamma_fn(x, &p(106)).unwrap().to_f64();
            assert!(((s - gamma_lanczos(x)) / s).abs() < 1e-13, "{x}");
        }
    }

    #[test]
    fn ln_gamma_of_large_argument() {
        let x = Float::with_val(106, 1000.5);
        let ours = ln_gamma_float(&x, 106).unwrap();
        let reference = Float::with_val(200, &x).ln_gamma();
        assert!((Float::with_val(200, &ours - &reference)).to_f64().abs() < 1e-27);
    }
}
