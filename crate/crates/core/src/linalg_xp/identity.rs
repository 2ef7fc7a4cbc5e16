use rug::Float;

use super::{det_report, PrecisionConfig, XMatrix};
use crate::error::{Error, Result};

/// Working precision of the brute-force check.
const CHECK_BITS: u32 = 200;

/// Both sides of the determinant-sum identity
///
/// ```text
/// sum_{n in K^N} det[f(x_i, n_j) g(y_j, n_j)] = 1/N! sum_{n in K^N} det[f(x_i, n_j)] det[g(y_i, n_j)]
/// ```
///
/// by exhaustive enumeration. `f_table[k][i]` holds `f(x_i, k)` and
/// `g_table[k][j]` holds `g(y_j, k)` for `k < K`. An optional weight `h[k]`
/// multiplies every summand by `prod_j h(n_j)`.
pub fn det_sum_identity_check(
    f_table: &[Vec<f64>],
    g_table: &[Vec<f64>],
    h: Option<&[f64]>,
) -> Result<(f64, f64)> {
    let k = f_table.len();
    if k == 0 || g_table.len() != k {
        return Err(Error::InvalidParams("tables need the same positive number of rows".into()));
    }
    let n = f_table[0].len();
    if n == 0 || f_table.iter().chain(g_table).any(|r| r.len() != n) {
        return Err(Error::InvalidParams("ragged or empty table".into()));
    }
    if n > 5 || k > 8 {
        return Err(Error::InvalidParams(format!("N = {n}, K = {k} is too large to enumerate")));
    }
    if let Some(h) = h {
        if h.len() != k {
            return Err(Error::InvalidParams("weight length differs from K".into()));
        }
    }
    let prec = PrecisionConfig::new(CHECK_BITS)?;
    let det = |m: XMatrix| -> Result<Float> {
        let r = det_report(&m, &prec, None)?;
        if r.sign == 0 {
            return Ok(Float::new(CHECK_BITS));
        }
        Ok(Float::with_val(CHECK_BITS, r.log_abs.exp_ref()) * r.sign as i32)
    };

    let mut lhs = Float::new(CHECK_BITS);
    let mut rhs = Float::new(CHECK_BITS);
    let mut idx = vec![0usize; n];
    loop {
        let joint = XMatrix::from_fn(n, n, CHECK_BITS, |i, j| {
            Float::with_val(CHECK_BITS, f_table[idx[j]][i]) * g_table[idx[j]][j]
        })?;
        let fm = XMatrix::from_fn(n, n, CHECK_BITS, |i, j| Float::with_val(CHECK_BITS, f_table[idx[j]][i]))?;
        let gm = XMatrix::from_fn(n, n, CHECK_BITS, |i, j| Float::with_val(CHECK_BITS, g_table[idx[j]][i]))?;
        let mut w = Float::with_val(CHECK_BITS, 1);
        if let Some(h) = h {
            for &c in &idx {
                w *= h[c];
            }
        }
        lhs += det(joint)? * &w;
        rhs += det(fm)? * det(gm)? * &w;

        let mut p = 0;
        loop {
            idx[p] += 1;
            if idx[p] < k {
                break;
            }
            idx[p] = 0;
            p += 1;
            if p == n {
                let fact: u32 = (1..=n as u32).product();
                rhs /= fact;
                return Ok((lhs.to_f64(), rhs.to_f64()));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_path_is_a_plain_sum() {
        let f = vec![vec![0.5], vec![-1.25], vec![2.0]];
        let g = vec![vec![3.0], vec![0.75], vec![-0.5]];
        let (l, r) = det_sum_identity_check(&f, &g, None).unwrap();
        let direct: f64 = f.iter().zip(&g).map(|(a, b)| a[0] * b[0]).sum();
        assert_eq!(l, direct);
        assert_eq!(r, direct);
    }

    #[test]
    fn rejects_mismatched_tables() {
        let f = vec![vec![1.0, 2.0]];
        let g = vec![vec![1.0]];
        assert!(det_sum_identity_check(&f, &g, None).is_err());
    }
}
