//! Extended-precision dense linear algebra on MPFR reals.

mod det;
mod identity;
mod matrix;
mod precision;

pub use det::{det_report, det_signed_log, DetReport};
pub use identity::det_sum_identity_check;
pub use matrix::XMatrix;
pub use precision::PrecisionConfig;

/// `prod_{j<k} (x_k - x_j)` by direct product.
pub fn vandermonde(x: &[f64]) -> f64 {
    let mut p = 1.0;
    for k in 0..x.len() {
        for j in 0..k {
            p *= x[k] - x[j];
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vandermonde_small_cases() {
        assert_eq!(vandermonde(&[]), 1.0);
        assert_eq!(vandermonde(&[3.7]), 1.0);
        assert_eq!(vandermonde(&[1.0, 2.0, 3.0]), 2.0);
    }

    #[test]
    fn vandermonde_matches_power_determinant() {
        let x: [f64; 4] = [0.3, -1.1, 2.4, 0.9];
        let n = x.len();
        let m = XMatrix::from_f64(
            n,
            n,
            106,
            &(0..n * n)
                .map(|e| x[e % n].powi((n - 1 - e / n) as i32))
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let (s, l) = det_signed_log(&m, &PrecisionConfig::double_double()).unwrap();
        let sign = if (n * (n - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let det = s as f64 * l.exp();
        let v = sign * vandermonde(&x);
        assert!((det - v).abs() < 1e-13 * v.abs());
    }
}
