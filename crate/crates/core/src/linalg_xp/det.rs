use rug::float::Special;
use rug::Float;

use super::{PrecisionConfig, XMatrix};
use crate::error::{Error, Result};

/// Determinant in sign / log-magnitude form with conditioning diagnostics.
#[derive(Debug, Clone)]
pub struct DetReport {
    /// -1, 0 or +1. Zero only when a pivot column is exactly zero.
    pub sign: i8,
    /// `ln |det|` at working precision; `-inf` for a singular matrix.
    pub log_abs: Float,
    /// First-order relative error estimate: LU rounding plus the supplied
    /// per-entry relative errors propagated through `A^{-1}`.
    pub rel_err_est: f64,
    /// Rounding-only part of `rel_err_est`.
    pub rounding_rel_err: f64,
    /// Part of `rel_err_est` caused by the supplied entry errors.
    pub entry_rel_err: f64,
    /// `sum_ij |A^{-1}_ji| (|A_ij| + (|L||U|)_ij)` on the equilibrated matrix.
    pub condition: f64,
    /// `max |U| / max |A|` on the equilibrated matrix.
    pub pivot_growth: f64,
}

impl DetReport {
    pub fn log_abs_f64(&self) -> f64 {
        self.log_abs.to_f64()
    }

    /// The determinant itself, rounded to f64 (may under/overflow).
    pub fn value_f64(&self) -> f64 {
        if self.sign == 0 {
            return 0.0;
        }
        self.sign as f64 * self.log_abs.to_f64().exp()
    }
}

/// Sign and natural log of `|det m|` by LU with partial pivoting at the
/// working precision, after power-of-two row and column equilibration.
pub fn det_signed_log(m: &XMatrix, precision: &PrecisionConfig) -> Result<(i8, f64)> {
    let r = det_report(m, precision, None)?;
    Ok((r.sign, r.log_abs_f64()))
}

/// Full determinant report. `entry_rel_err`, when given, holds a relative
/// error bound for every entry in row-major order.
pub fn det_report(
    m: &XMatrix,
    precision: &PrecisionConfig,
    entry_rel_err: Option<&[f64]>,
) -> Result<DetReport> {
    if !m.is_square() {
        return Err(Error::InvalidParams(format!(
            "determinant of a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    if let Some(e) = entry_rel_err {
        if e.len() != n * n {
            return Err(Error::InvalidParams("entry error table has the wrong size".into()));
        }
    }
    let bits = precision.working_bits;
    if n == 0 {
        return Ok(DetReport {
            sign: 1,
            log_abs: Float::new(bits),
            rel_err_est: 0.0,
            rounding_rel_err: 0.0,
            entry_rel_err: 0.0,
            condition: 0.0,
            pivot_growth: 1.0,
        });
    }

    let mut a: Vec<Float> = m.entries().iter().map(|v| Float::with_val(bits, v)).collect();

    // Equilibrate by exact powers of two so scaling adds no rounding.
    let mut shift: i64 = 0;
    for i in 0..n {
        let e = max_exp(&a[i * n..(i + 1) * n]);
        match e {
            Some(e) => {
                shift += e as i64;
                for v in &mut a[i * n..(i + 1) * n] {
                    *v >>= e;
                }
            }
            None => return Ok(singular(bits)),
        }
    }
    for j in 0..n {
        let col: Vec<&Float> = (0..n).map(|i| &a[i * n + j]).collect();
        let e = col.iter().filter_map(|v| if v.is_zero() { None } else { v.get_exp() }).max();
        match e {
            Some(e) => {
                shift += e as i64;
                for i in 0..n {
                    a[i * n + j] >>= e;
                }
            }
            None => return Ok(singular(bits)),
        }
    }
    let equilibrated = a.clone();
    let max_a = a.iter().map(|v| v.to_f64().abs()).fold(0.0, f64::max);

    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign: i8 = 1;
    for k in 0..n {
        let mut p = k;
        for r in (k + 1)..n {
            if a[r * n + k].cmp_abs(&a[p * n + k]) == Some(std::cmp::Ordering::Greater) {
                p = r;
            }
        }
        if a[p * n + k].is_zero() {
            return Ok(singular(bits));
        }
        if p != k {
            for c in 0..n {
                a.swap(k * n + c, p * n + c);
            }
            perm.swap(k, p);
            sign = -sign;
        }
        let pivot = a[k * n + k].clone();
        for r in (k + 1)..n {
            let l = Float::with_val(bits, &a[r * n + k] / &pivot);
            for c in (k + 1)..n {
                let t = Float::with_val(bits, &l * &a[k * n + c]);
                a[r * n + c] -= t;
            }
            a[r * n + k] = l;
        }
    }

    let mut log_abs = Float::with_val(bits, shift) * Float::with_val(bits, rug::float::Constant::Log2);
    let mut max_u = 0.0f64;
    for k in 0..n {
        let u = &a[k * n + k];
        if u.is_sign_negative() {
            sign = -sign;
        }
        log_abs += Float::with_val(bits, u.abs_ref()).ln();
        for c in k..n {
            max_u = max_u.max(a[k * n + c].to_f64().abs());
        }
    }

    let inv = inverse_from_lu(&a, &perm, n, bits);

    // |L||U| in pivoted row order.
    let lu_abs: Vec<f64> = {
        let l = |i: usize, k: usize| -> f64 {
            if i == k {
                1.0
            } else if k < i {
                a[i * n + k].to_f64().abs()
            } else {
                0.0
            }
        };
        let u = |k: usize, j: usize| -> f64 {
            if k <= j {
                a[k * n + j].to_f64().abs()
            } else {
                0.0
            }
        };
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = (0..=i.min(j)).map(|k| l(i, k) * u(k, j)).sum();
            }
        }
        out
    };

    let u_round = precision.unit_roundoff();
    let nu = n as f64 * u_round;
    let gamma_n = nu / (1.0 - nu);
    let mut cond_a = 0.0;
    let mut cond_lu = 0.0;
    let mut entry_term = 0.0;
    for (pi, &row) in perm.iter().enumerate() {
        for j in 0..n {
            let inv_ji = inv[j * n + row].to_f64().abs();
            let a_ij = equilibrated[row * n + j].to_f64().abs();
            cond_a += inv_ji * a_ij;
            cond_lu += inv_ji * lu_abs[pi * n + j];
            if let Some(e) = entry_rel_err {
                entry_term += inv_ji * a_ij * e[row * n + j];
            }
        }
    }
    let rounding = gamma_n * (cond_lu + cond_a);
    Ok(DetReport {
        sign,
        log_abs,
        rel_err_est: rounding + entry_term,
        rounding_rel_err: rounding,
        entry_rel_err: entry_term,
        condition: cond_a + cond_lu,
        pivot_growth: if max_a > 0.0 { max_u / max_a } else { f64::INFINITY },
    })
}

fn max_exp(row: &[Float]) -> Option<i32> {
    row.iter()
        .filter(|v| !v.is_zero())
        .filter_map(Float::get_exp)
        .max()
}

fn singular(bits: u32) -> DetReport {
    DetReport {
        sign: 0,
        log_abs: Float::with_val(bits, Special::NegInfinity),
        rel_err_est: 0.0,
        rounding_rel_err: 0.0,
        entry_rel_err: 0.0,
        condition: f64::INFINITY,
        pivot_growth: f64::INFINITY,
    }
}

/// `A^{-1}` from packed LU factors of `PA`, row-major.
fn inverse_from_lu(lu: &[Float], perm: &[usize], n: usize, bits: u32) -> Vec<Float> {
    let mut inv = vec![Float::new(bits); n * n];
    for col in 0..n {
        // Solve A x = e_col, i.e. L U x = P e_col.
        let mut y: Vec<Float> = perm
            .iter()
            .map(|&p| Float::with_val(bits, (p == col) as u32))
            .collect();
        for i in 0..n {
            for k in 0..i {
                let t = Float::with_val(bits, &lu[i * n + k] * &y[k]);
                y[i] -= t;
            }
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                let t = Float::with_val(bits, &lu[i * n + k] * &y[k]);
                y[i] -= t;
            }
            y[i] /= &lu[i * n + i];
        }
        for (i, v) in y.into_iter().enumerate() {
            inv[i * n + col] = v;
        }
    }
    inv
}
