use rug::{Float, Integer};

use super::bessel_j::{bessel_j_mp, check_order};
use crate::error::{Error, Result};
use crate::linalg_xp::PrecisionConfig;

/// Highest derivative order accepted by [`bessel_j_deriv`].
pub const DEFAULT_MAX_ORDER: usize = 64;

const INITIAL_GUARD: u32 = 32;

/// `J_alpha^{(n)}(x)` for `n <= DEFAULT_MAX_ORDER`.
///
/// The derivative is reduced exactly to `A_n(1/x) J_alpha(x) + B_n(1/x) J_{alpha+1}(x)`
/// with polynomial coefficients built from
///
/// ```text
/// J_a'     = (a/x) J_a - J_{a+1}
/// J_{a+1}' = J_a - ((a+1)/x) J_{a+1}
/// ```
///
/// so one pair of Bessel evaluations serves every order. At the origin
/// only integer orders are defined.
pub fn bessel_j_deriv(alpha: f64, n: usize, x: f64, precision: &PrecisionConfig) -> Result<Float> {
    bessel_j_deriv_with_limit(alpha, n, x, precision, DEFAULT_MAX_ORDER)
}

pub fn bessel_j_deriv_with_limit(
    alpha: f64,
    n: usize,
    x: f64,
    precision: &PrecisionConfig,
    max_order: usize,
) -> Result<Float> {
    check_order(alpha)?;
    if n > max_order {
        return Err(Error::InvalidParams(format!("derivative order {n} exceeds {max_order}")));
    }
    if !(x.is_finite() && x >= 0.0) {
        return Err(Error::Domain(format!("argument x = {x} must be finite and >= 0")));
    }
    let bits = precision.working_bits;
    if x == 0.0 {
        return deriv_at_origin(alpha, n, bits);
    }
    let v = bessel_j_derivs_mp(&Float::with_val(53, alpha), &Float::with_val(53, x), n, bits)?;
    Ok(v.into_iter().next_back().expect("order n is present"))
}

/// Coefficient polynomials `A_k`, `B_k` in `u = 1/x` for `k = 0..=max_order`.
#[derive(Debug, Clone)]
pub struct DerivCoeffs {
    a: Vec<Vec<Float>>,
    b: Vec<Vec<Float>>,
    bits: u32,
}

impl DerivCoeffs {
    pub fn new(nu: &Float, max_order: usize, bits: u32) -> Self {
        let nu = Float::with_val(bits, nu);
        let mut a = vec![vec![Float::with_val(bits, 1)]];
        let mut b = vec![vec![Float::new(bits)]];
        for n in 0..max_order {
            let (an, bn) = (&a[n], &b[n]);
            let deg = an.len() + 1;
            let mut na = vec![Float::new(bits); deg];
            let mut nb = vec![Float::new(bits); deg];
            for k in 0..deg {
                // A_{n+1}[k] = (nu - k + 1) A_n[k-1] + B_n[k]
                if k >= 1 && k - 1 < an.len() {
                    let c = Float::with_val(bits, &nu - (k as i32 - 1));
                    na[k] += c * &an[k - 1];
                }
                if k < bn.len() {
                    na[k] += &bn[k];
                }
                // B_{n+1}[k] = -A_n[k] - (nu + k) B_n[k-1]
                if k < an.len() {
                    nb[k] -= &an[k];
                }
                if k >= 1 && k - 1 < bn.len() {
                    let c = Float::with_val(bits, &nu + k as i32);
                    nb[k] -= c * &bn[k - 1];
                }
            }
            a.push(na);
            b.push(nb);
        }
        Self { a, b, bits }
    }

    pub fn max_order(&self) -> usize {
        self.a.len() - 1
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Coefficients of `u^k` in `A_n` and `B_n`.
    pub fn poly(&self, n: usize) -> (&[Float], &[Float]) {
        (&self.a[n], &self.b[n])
    }

    /// All derivatives up to `max_order` from `J_nu(x)` and `J_{nu+1}(x)`,
    /// together with the worst cancellation `log2(sum |terms| / |result|)`.
    pub fn eval(&self, x: &Float, j0: &Float, j1: &Float) -> (Vec<Float>, f64) {
        let bits = self.bits;
        let u = Float::with_val(bits, x.recip_ref());
        let mut upow = vec![Float::with_val(bits, 1)];
        for k in 1..=self.max_order() + 1 {
            let next = Float::with_val(bits, &upow[k - 1] * &u);
            upow.push(next);
        }
        let mut out = Vec::with_capacity(self.a.len());
        let mut loss = 0.0f64;
        for n in 0..self.a.len() {
            let mut ca = Float::new(bits);
            let mut cb = Float::new(bits);
            let mut mag = Float::new(53);
            for (k, c) in self.a[n].iter().enumerate() {
                let t = Float::with_val(bits, c * &upow[k]);
                mag += Float::with_val(53, &t * j0).abs();
                ca += t;
            }
            for (k, c) in self.b[n].iter().enumerate() {
                let t = Float::with_val(bits, c * &upow[k]);
                mag += Float::with_val(53, &t * j1).abs();
                cb += t;
            }
            let r = ca * j0 + cb * j1;
            let ra = Float::with_val(53, r.abs_ref());
            if !mag.is_zero() {
                let l = if ra.is_zero() {
                    f64::INFINITY
                } else {
                    (mag.to_f64() / ra.to_f64()).log2()
                };
                loss = loss.max(l);
            }
            out.push(r);
        }
        (out, loss)
    }
}

/// `J_nu^{(k)}(x)` for `k = 0..=max_order`, `x > 0`, at `bits` bits.
///
/// The reduction can cancel heavily for small `x`; the evaluation is redone
/// with more guard bits until the measured loss fits inside the guard.
pub fn bessel_j_derivs_mp(nu: &Float, x: &Float, max_order: usize, bits: u32) -> Result<Vec<Float>> {
    if *x <= 0 {
        return Err(Error::Domain("derivative reduction needs x > 0".into()));
    }
    let mut guard = INITIAL_GUARD;
    let cap = 8 * bits + 2048;
    loop {
        let wp = bits + guard;
        let j0 = bessel_j_mp(nu, x, wp)?;
        let nu1 = Float::with_val(nu.prec() + 1, nu + 1u32);
        let j1 = bessel_j_mp(&nu1, x, wp)?;
        let coeffs = DerivCoeffs::new(nu, max_order, wp);
        let (vals, loss) = coeffs.eval(&Float::with_val(wp, x), &j0, &j1);
        if loss <= guard as f64 - 8.0 || guard >= cap {
            return Ok(vals.into_iter().map(|v| Float::with_val(bits, v)).collect());
        }
        let want = if loss.is_finite() { loss.ceil() as u32 + 16 } else { 2 * guard };
        guard = want.max(2 * guard).min(cap);
    }
}

/// `J_m^{(n)}(0) = (-1)^k n! / (2^n k! (k + m)!)` when `n = 2k + m`, else 0.
fn deriv_at_origin(alpha: f64, n: usize, bits: u32) -> Result<Float> {
    if alpha.fract() != 0.0 {
        return Err(Error::Domain(format!(
            "J_{alpha} has an algebraic singularity at the origin"
        )));
    }
    let m = alpha as usize;
    if n < m || (n - m) % 2 == 1 {
        return Ok(Float::new(bits));
    }
    let k = (n - m) / 2;
    let fact = |v: usize| Integer::from(Integer::factorial(v as u32));
    let num = fact(n);
    let den = fact(k) * fact(k + m) * (Integer::from(1) << n as u32);
    let v = Float::with_val(bits, &num) / Float::with_val(bits, &den);
    Ok(if k % 2 == 1 { -v } else { v })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{bessel_j, bessel_j_mp};

    fn p106() -> PrecisionConfig {
        PrecisionConfig::double_double()
    }

    fn d(alpha: f64, n: usize, x: f64) -> f64 {
        bessel_j_deriv(alpha, n, x, &p106()).unwrap().to_f64()
    }

    fn j(alpha: f64, x: f64) -> f64 {
        bessel_j(alpha, x, &p106()).unwrap().to_f64()
    }

    #[test]
    fn low_order_coefficients() {
        let c = DerivCoeffs::new(&Float::with_val(53, 1.5), 2, 106);
        let (a2, b2) = c.poly(2);
        // A_2 = -1 + nu (nu - 1) u^2, B_2 = u
        assert_eq!(a2[0].to_f64(), -1.0);
        assert_eq!(a2[1].to_f64(), 0.0);
        assert_eq!(a2[2].to_f64(), 0.75);
        assert_eq!(b2[0].to_f64(), 0.0);
        assert_eq!(b2[1].to_f64(), 1.0);
    }

    #[test]
    fn zeroth_and_first_order() {
        for &alpha in &[-0.5, 0.0, 1.0, 2.7] {
            for &x in &[0.3, 2.0, 11.0] {
                assert_eq!(d(alpha, 0, x), j(alpha, x));
                let want = alpha / x * j(alpha, x) - j(alpha + 1.0, x);
                assert!((d(alpha, 1, x) - want).abs() < 1e-15 * want.abs().max(1e-2));
            }
        }
    }

    #[test]
    fn bessel_equation_for_second_order() {
        for &alpha in &[-0.5, 0.0, 0.5, 1.0, 2.7] {
            for &x in &[0.1, 0.9, 4.0, 27.0, 50.0] {
                let d1 = d(alpha, 1, x);
                let want = -d1 / x - (1.0 - alpha * alpha / (x * x)) * j(alpha, x);
                let got = d(alpha, 2, x);
                assert!((got - want).abs() <= 1e-12 * want.abs().max(1e-300) + 1e-15, "{alpha} {x}");
            }
        }
    }

    #[test]
    fn third_derivative_against_finite_differences() {
        // Central fourth-order stencil for f''' at steps h and h/2, then one
        // Richardson step. Evaluated at 300 bits so rounding stays negligible.
        let bits = 300;
        let fh = |h: f64| {
            let nu = Float::with_val(bits, 1);
            let h = Float::with_val(bits, h);
            let f = |k: i32| {
                let x = Float::with_val(bits, &h * k) + 2u32;
                bessel_j_mp(&nu, &x, bits).unwrap()
            };
            let v = -f(3) + f(2) * 8u32 - f(1) * 13u32 + f(-1) * 13u32 - f(-2) * 8u32 + f(-3);
            (v / (Float::with_val(bits, h.square_ref()) * &h * 8u32)).to_f64()
        };
        let h = 1e-4;
        let r = (16.0 * fh(h / 2.0) - fh(h)) / 15.0;
        let got = d(1.0, 3, 2.0);
        assert!((got - r).abs() < 1e-9, "{got} {r}");
    }

    #[test]
    fn origin_values() {
        assert_eq!(d(0.0, 0, 0.0), 1.0);
        assert_eq!(d(0.0, 2, 0.0), -0.5);
        assert_eq!(d(1.0, 1, 0.0), 0.5);
        assert_eq!(d(1.0, 2, 0.0), 0.0);
        assert_eq!(d(1.0, 3, 0.0), -0.375);
        assert!(bessel_j_deriv(0.5, 1, 0.0, &p106()).is_err());
    }

    #[test]
    fn order_limit() {
        assert!(bessel_j_deriv(1.0, 65, 1.0, &p106()).is_err());
        assert!(bessel_j_deriv(1.0, 64, 1.0, &p106()).is_ok());
    }

    #[test]
    fn small_argument_cancellation_is_resolved() {
        // J_1^{(9)}(x) = 9!/(2^9 4! 5!) + O(x^2) near the origin.
        let v = d(1.0, 9, 1e-4);
        let at0 = d(1.0, 9, 0.0);
        assert!((v - at0).abs() < 1e-8, "{v} {at0}");
    }
}
