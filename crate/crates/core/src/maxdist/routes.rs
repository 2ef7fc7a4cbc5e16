use rug::float::Constant;
use rug::{Float, Integer};

use super::lattice::{lattice_sum, Envelope, LatticeSums, ZeroCursor, ZERO_SPACING};
use super::{ModelParams, MomentKind, MomentTable, ProbabilityResult, Route, TruncationPolicy};
use crate::error::{Error, Result};
use crate::linalg_xp::{det_report, PrecisionConfig, XMatrix};
use crate::specfun::{bessel_j_derivs_mp, bessel_j_mp, ln_gamma_float, BesselZeroTable};

/// Guard bits carried by lattice sums and prefactors.
const SUM_GUARD: u32 = 32;

/// Reruns `f` at doubled precision while its determinant rounding estimate
/// exceeds the budget of `precision`.
fn with_retry<F>(precision: &PrecisionConfig, mut f: F) -> Result<ProbabilityResult>
where
    F: FnMut(&PrecisionConfig) -> Result<(ProbabilityResult, f64)>,
{
    let mut p = *precision;
    loop {
        let (r, rounding) = f(&p)?;
        if p.auto_retry && rounding > p.error_budget() {
            if let Some(next) = p.doubled() {
                p = next;
                continue;
            }
        }
        return Ok(r);
    }
}

/// Combines a determinant with a log-space prefactor `sign * e^{ln_pref}`.
fn finish(
    route: Route,
    m: &XMatrix,
    entry_err: &[f64],
    ln_pref: &Float,
    pref_sign: i8,
    n_terms: usize,
    p: &PrecisionConfig,
) -> Result<(ProbabilityResult, f64)> {
    let d = det_report(m, p, Some(entry_err))?;
    let bits = p.working_bits;
    if d.sign == 0 {
        let mut r = ProbabilityResult::exact_zero(route, bits, "determinant is singular at this precision");
        r.est_error = f64::INFINITY;
        r.n_terms_used = n_terms;
        r.condition = d.condition;
        return Ok((r, f64::INFINITY));
    }
    let sign = d.sign * pref_sign;
    let ln = Float::with_val(bits + SUM_GUARD, ln_pref + &d.log_abs);
    let mag = Float::with_val(bits, ln.exp_ref()).to_f64();
    let value = sign as f64 * mag;
    let prefactor_err = 8.0 * p.unit_roundoff() * mag;
    let truncation_error = mag * d.entry_rel_err;
    let rounding_error = mag * d.rounding_rel_err + prefactor_err;
    Ok((
        ProbabilityResult {
            value,
            log_abs: ln.to_f64(),
            sign,
            route,
            est_error: truncation_error + rounding_error,
            truncation_error,
            rounding_error,
            n_terms_used: n_terms,
            precision_bits: bits,
            condition: d.condition,
            note: None,
        },
        d.rounding_rel_err,
    ))
}

fn ln_factorial(k: u32, bits: u32) -> Float {
    Float::with_val(bits, &Integer::from(Integer::factorial(k))).ln()
}

fn ln_of(v: f64, bits: u32) -> Float {
    Float::with_val(bits, v).ln()
}

/// `ln c_N(alpha) - N(3N + 2 alpha + 1)/2 ln M` for a positive start.
fn ln_prefactor_positive(params: &ModelParams, bits: u32) -> Result<Float> {
    let n = params.n_paths as f64;
    let nn = params.n_paths as u32;
    let (alpha, a, m) = (params.alpha, params.start, params.wall);
    let ln2 = Float::with_val(bits, Constant::Log2);
    let mut s = ln2 * (n * (3.0 - n) / 2.0);
    s += Float::with_val(bits, a) * a * (n / 2.0);
    s -= ln_of(a, bits) * (n * (n + 2.0 * alpha - 1.0) / 2.0);
    for j in 1..=nn {
        s -= ln_gamma_float(&Float::with_val(bits, j), bits)?;
    }
    s -= ln_of(m, bits) * (n * (3.0 * n + 2.0 * alpha + 1.0) / 2.0);
    Ok(s)
}

/// `ln c~_N(alpha) - 2N(N + alpha) ln M` for a start at the origin.
fn ln_prefactor_origin(params: &ModelParams, bits: u32) -> Result<Float> {
    let n = params.n_paths as f64;
    let nn = params.n_paths as u32;
    let (alpha, m) = (params.alpha, params.wall);
    let ln2 = Float::with_val(bits, Constant::Log2);
    let mut s = ln2 * (2.0 * n - alpha * n - n * n);
    for j in 1..=nn {
        s -= ln_gamma_float(&Float::with_val(bits, j), bits)?;
        let aj = Float::with_val(bits, alpha) + j;
        s -= ln_gamma_float(&aj, bits)?;
    }
    s -= ln_of(m, bits) * (2.0 * n * (n + alpha));
    Ok(s)
}

/// Exponent `(N(N-3) + 2 n1^2)/4` of the block-Hankel sign, `n1 = ceil(N/2)`.
pub fn hankel_sign_exponent(n: usize) -> Result<i64> {
    let n = n as i64;
    let n1 = (n + 1) / 2;
    let num = n * (n - 3) + 2 * n1 * n1;
    if num % 4 != 0 {
        return Err(Error::InvalidParams(format!("sign exponent {num}/4 is not an integer for N = {n}")));
    }
    Ok(num / 4)
}

/// Common per-zero factors: `x` (at `sb` bits), `x^alpha` and
/// `e^{-x^2/(2M^2)} / J_{alpha+1}(x)^2`.
struct ZeroWeights {
    x: Float,
    x_alpha: Float,
    w: Float,
}

fn zero_weights(cursor: &mut ZeroCursor<'_>, n: usize, alpha: f64, m: f64, sb: u32) -> Result<ZeroWeights> {
    let (x, jn1) = cursor.get(n)?;
    let x = Float::with_val(sb, x);
    let jn1 = Float::with_val(sb, jn1);
    let two_m2 = Float::with_val(sb, m) * m * 2u32;
    let g = (-Float::with_val(sb, x.square_ref()) / two_m2).exp();
    let w = g / jn1.square();
    let x_alpha = (Float::with_val(sb, x.ln_ref()) * alpha).exp();
    Ok(ZeroWeights { x, x_alpha, w })
}

fn powers(x: &Float, count: usize, bits: u32) -> Vec<Float> {
    let mut p = vec![Float::with_val(bits, 1)];
    for k in 1..count {
        let next = Float::with_val(bits, &p[k - 1] * x);
        p.push(next);
    }
    p
}

fn matrix_from(n: usize, bits: u32, sums: &LatticeSums) -> Result<XMatrix> {
    XMatrix::from_fn(n, n, bits, |i, j| sums.sums[i * n + j].clone())
}

fn prepare(params: &ModelParams, trunc: &TruncationPolicy, precision: &PrecisionConfig) -> Result<()> {
    params.validate()?;
    trunc.validate()?;
    PrecisionConfig::new(precision.working_bits)?;
    Ok(())
}

/// Determinant of lattice sums over the zeros of `J_alpha`.
pub fn prob_thm1(params: &ModelParams, trunc: &TruncationPolicy, precision: &PrecisionConfig) -> Result<ProbabilityResult> {
    prob_thm1_with(params, trunc, precision, None)
}

/// [`prob_thm1`] reusing a shared zero table when it is precise enough.
pub fn prob_thm1_with(
    params: &ModelParams,
    trunc: &TruncationPolicy,
    precision: &PrecisionConfig,
    zeros: Option<&BesselZeroTable>,
) -> Result<ProbabilityResult> {
    prepare(params, trunc, precision)?;
    if params.wall_not_above_start() {
        return Ok(ProbabilityResult::exact_zero(Route::Thm1, precision.working_bits, "M <= a"));
    }
    with_retry(precision, |p| thm1_once(params, trunc, p, zeros))
}

fn thm1_once(
    params: &ModelParams,
    trunc: &TruncationPolicy,
    p: &PrecisionConfig,
    zeros: Option<&BesselZeroTable>,
) -> Result<(ProbabilityResult, f64)> {
    let bits = p.working_bits;
    let sb = bits + SUM_GUARD;
    let n = params.n_paths;
    let (alpha, a, m) = (params.alpha, params.start, params.wall);
    let mut cursor = ZeroCursor::new(alpha, sb, zeros)?;
    let decay = 1.0 / (2.0 * m * m);

    if a > 0.0 {
        let exps = (1..=n)
            .flat_map(|i| (1..=n).map(move |j| (i + 2 * j) as f64 + alpha - 2.0))
            .collect();
        let env = Envelope {
            exponents: exps,
            decay,
            spacing: ZERO_SPACING,
        };
        let nu = Float::with_val(53, alpha);
        let ratio = Float::with_val(sb, a) / m;
        let sums = lattice_sum(&env, trunc, sb, |k| {
            let zw = zero_weights(&mut cursor, k, alpha, m, sb)?;
            let z = Float::with_val(sb, &ratio * &zw.x);
            let d = bessel_j_derivs_mp(&nu, &z, n - 1, sb)?;
            let xp = powers(&zw.x, 3 * n - 2, sb);
            let base = Float::with_val(sb, &zw.x_alpha * &zw.w);
            let mut terms = Vec::with_capacity(n * n);
            for i in 1..=n {
                let di = Float::with_val(sb, &base * &d[i - 1]);
                for j in 1..=n {
                    let t = Float::with_val(sb, &di * &xp[i + 2 * j - 3]);
                    terms.push(if i % 2 == 0 { -t } else { t });
                }
            }
            Ok((zw.x.to_f64(), terms))
        })?;
        let mat = matrix_from(n, bits, &sums)?;
        let err = sums.rel_errors(sb);
        let ln_pref = ln_prefactor_positive(params, sb)?;
        finish(Route::Thm1, &mat, &err, &ln_pref, 1, sums.n_terms, p)
    } else {
        let exps = (1..=n)
            .flat_map(|i| (1..=n).map(move |j| (2 * i + 2 * j) as f64 + 2.0 * alpha - 3.0))
            .collect();
        let env = Envelope {
            exponents: exps,
            decay,
            spacing: ZERO_SPACING,
        };
        let sums = lattice_sum(&env, trunc, sb, |k| {
            let zw = zero_weights(&mut cursor, k, alpha, m, sb)?;
            let x2 = Float::with_val(sb, zw.x.square_ref());
            let xp = powers(&x2, 2 * n - 1, sb);
            let base = Float::with_val(sb, zw.x_alpha.square_ref()) * &zw.w;
            let mut terms = Vec::with_capacity(n * n);
            for i in 1..=n {
                for j in 1..=n {
                    terms.push(Float::with_val(sb, &base * &xp[i + j - 2]));
                }
            }
            Ok((zw.x.to_f64(), terms))
        })?;
        let mat = matrix_from(n, bits, &sums)?;
        let err = sums.rel_errors(sb);
        let ln_pref = ln_prefactor_origin(params, sb)?;
        finish(Route::Thm1, &mat, &err, &ln_pref, 1, sums.n_terms, p)
    }
}

/// Moments `m_k^{(1)}, m_k^{(2)}` for `k = 0..=k_max`; needs `a > 0`, `M > a`.
pub fn moments_mop(
    params: &ModelParams,
    k_max: usize,
    trunc: &TruncationPolicy,
    precision: &PrecisionConfig,
) -> Result<MomentTable> {
    moments_mop_with(params, k_max, trunc, precision, None)
}

pub fn moments_mop_with(
    params: &ModelParams,
    k_max: usize,
    trunc: &TruncationPolicy,
    precision: &PrecisionConfig,
    zeros: Option<&BesselZeroTable>,
) -> Result<MomentTable> {
    prepare(params, trunc, precision)?;
    let (a, m) = (params.start, params.wall);
    if !(a > 0.0 && m > a) {
        return Err(Error::InvalidParams(format!("moment pair needs M > a > 0, got a = {a}, M = {m}")));
    }
    let bits = precision.working_bits;
    mop_sums(params, k_max, trunc, bits + SUM_GUARD, bits, zeros)
}

/// Moment pair summed at `sb` bits and rounded to `bits`.
fn mop_sums(
    params: &ModelParams,
    k_max: usize,
    trunc: &TruncationPolicy,
    sb: u32,
    bits: u32,
    zeros: Option<&BesselZeroTable>,
) -> Result<MomentTable> {
    let (alpha, a, m) = (params.alpha, params.start, params.wall);
    let mut cursor = ZeroCursor::new(alpha, sb, zeros)?;
    let kk = k_max + 1;
    let mut exps: Vec<f64> = (0..kk).map(|k| 2.0 * k as f64 + alpha + 1.0).collect();
    exps.extend((0..kk).map(|k| 2.0 * k as f64 + alpha + 2.0));
    let env = Envelope {
        exponents: exps,
        decay: 1.0 / (2.0 * m * m),
        spacing: ZERO_SPACING,
    };
    let nu = Float::with_val(53, alpha);
    let nu1 = Float::with_val(53, alpha + 1.0);
    let ratio = Float::with_val(sb, a) / m;
    let sums = lattice_sum(&env, trunc, sb, |k| {
        let zw = zero_weights(&mut cursor, k, alpha, m, sb)?;
        let z = Float::with_val(sb, &ratio * &zw.x);
        let j0 = bessel_j_mp(&nu, &z, sb)?;
        let j1 = bessel_j_mp(&nu1, &z, sb)?;
        let x2 = Float::with_val(sb, zw.x.square_ref());
        let xp = powers(&x2, kk, sb);
        let w1 = Float::with_val(sb, &zw.x_alpha * &zw.w) * j0;
        let w2 = Float::with_val(sb, &zw.x_alpha * &zw.w) * &zw.x * j1;
        let mut terms: Vec<Float> = xp.iter().map(|p| Float::with_val(sb, p * &w1)).collect();
        terms.extend(xp.iter().map(|p| Float::with_val(sb, p * &w2)));
        Ok((zw.x.to_f64(), terms))
    })?;
    let rel = sums.rel_errors(sb);
    let m1 = sums.sums[..kk].iter().map(|v| Float::with_val(bits, v)).collect();
    let m2 = sums.sums[kk..].iter().map(|v| Float::with_val(bits, v)).collect();
    Ok(MomentTable {
        kind: MomentKind::MopPair,
        m1,
        m2,
        mt: Vec::new(),
        k_max,
        truncation: *trunc,
        n_terms_used: sums.n_terms,
        rel_err: rel,
    })
}

/// Moments `m~_k` for `k = 0..=k_max`; needs `a = 0`, `M > 0`.
pub fn moments_single(
    params: &ModelParams,
    k_max: usize,
    trunc: &TruncationPolicy,
    precision: &PrecisionConfig,
) -> Result<MomentTable> {
    moments_single_with(params, k_max, trunc, precision, None)
}

pub fn moments_single_with(
    params: &ModelParams,
    k_max: usize,
    trunc: &TruncationPolicy,
    precision: &PrecisionConfig,
    zeros: Option<&BesselZeroTable>,
) -> Result<MomentTable> {
    prepare(params, trunc, precision)?;
    let (a, m) = (params.start, params.wall);
    if !(a == 0.0 && m > 0.0) {
        return Err(Error::InvalidParams(format!("single moments need a = 0 < M, got a = {a}, M = {m}")));
    }
    let bits = precision.working_bits;
    single_sums(params, k_max, trunc, bits + SUM_GUARD, bits, zeros)
}

fn single_sums(
    params: &ModelParams,
    k_max: usize,
    trunc: &TruncationPolicy,
    sb: u32,
    bits: u32,
    zeros: Option<&BesselZeroTable>,
) -> Result<MomentTable> {
    let (alpha, m) = (params.alpha, params.wall);
    let mut cursor = ZeroCursor::new(alpha, sb, zeros)?;
    let kk = k_max + 1;
    let env = Envelope {
        exponents: (0..kk).map(|k| 2.0 * k as f64 + 2.0 * alpha + 1.0).collect(),
        decay: 1.0 / (2.0 * m * m),
        spacing: ZERO_SPACING,
    };
    let sums = lattice_sum(&env, trunc, sb, |k| {
        let zw = zero_weights(&mut cursor, k, alpha, m, sb)?;
        let x2 = Float::with_val(sb, zw.x.square_ref());
        let xp = powers(&x2, kk, sb);
        let w = Float::with_val(sb, zw.x_alpha.square_ref()) * &zw.w;
        Ok((zw.x.to_f64(), xp.iter().map(|p| Float::with_val(sb, p * &w)).collect()))
    })?;
    let rel = sums.rel_errors(sb);
    Ok(MomentTable {
        kind: MomentKind::Single,
        m1: Vec::new(),
        m2: Vec::new(),
        mt: sums.sums.iter().map(|v| Float::with_val(bits, v)).collect(),
        k_max,
        truncation: *trunc,
        n_terms_used: sums.n_terms,
        rel_err: rel,
    })
}

/// Block-Hankel (`a > 0`) or Hankel (`a = 0`) determinant of discrete moments.
pub fn prob_thm2_hankel(
    params: &ModelParams,
    trunc: &TruncationPolicy,
    precision: &PrecisionConfig,
) -> Result<ProbabilityResult> {
    prob_thm2_hankel_with(params, trunc, precision, None)
}

pub fn prob_thm2_hankel_with(
    params: &ModelParams,
    trunc: &TruncationPolicy,
    precision: &PrecisionConfig,
    zeros: Option<&BesselZeroTable>,
) -> Result<ProbabilityResult> {
    prepare(params, trunc, precision)?;
    if params.wall_not_above_start() {
        return Ok(ProbabilityResult::exact_zero(Route::Thm2Hankel, precision.working_bits, "M <= a"));
    }
    with_retry(precision, |p| hankel_once(params, trunc, p, zeros))
}

fn hankel_once(
    params: &ModelParams,
    trunc: &TruncationPolicy,
    p: &PrecisionConfig,
    zeros: Option<&BesselZeroTable>,
) -> Result<(ProbabilityResult, f64)> {
    let bits = p.working_bits;
    let sb = bits + SUM_GUARD;
    let n = params.n_paths;
    // Moments stay at the guarded precision; only the matrix is rounded to
    // the working precision.
    if params.start > 0.0 {
        let n1 = n.div_ceil(2);
        let k_max = n + n1 - 2;
        let t = mop_sums(params, k_max, trunc, sb, sb, zeros)?;
        let kk = k_max + 1;
        // Rows 0..n1 come from m^(1), the remaining n2 = N - n1 rows from m^(2).
        let pick = |i: usize, j: usize| -> (usize, usize) {
            if i < n1 {
                (0, i + j)
            } else {
                (1, i - n1 + j)
            }
        };
        let mat = XMatrix::from_fn(n, n, bits, |i, j| {
            let (b, k) = pick(i, j);
            if b == 0 {
                t.m1[k].clone()
            } else {
                t.m2[k].clone()
            }
        })?;
        let err: Vec<f64> = (0..n * n)
            .map(|e| {
                let (b, k) = pick(e / n, e % n);
                t.rel_err[b * kk + k]
            })
            .collect();
        let ln_pref = ln_prefactor_positive(params, sb)?;
        let sign = if hankel_sign_exponent(n)? % 2 == 0 { 1 } else { -1 };
        finish(Route::Thm2Hankel, &mat, &err, &ln_pref, sign, t.n_terms_used, p)
    } else {
        let t = single_sums(params, 2 * n - 2, trunc, sb, sb, zeros)?;
        let mat = XMatrix::from_fn(n, n, bits, |i, j| t.mt[i + j].clone())?;
        let err: Vec<f64> = (0..n * n).map(|e| t.rel_err[e / n + e % n]).collect();
        let ln_pref = ln_prefactor_origin(params, sb)?;
        finish(Route::Thm2Hankel, &mat, &err, &ln_pref, 1, t.n_terms_used, p)
    }
}

/// Theta-type lattice: points `n - shift` for `n >= 1`, each counted twice
/// for the symmetric sum over the full lattice.
fn theta_route(
    route: Route,
    n: usize,
    m: f64,
    shift: f64,
    base_exp: usize,
    ln_pref: impl Fn(u32) -> Float,
    trunc: &TruncationPolicy,
    precision: &PrecisionConfig,
) -> Result<ProbabilityResult> {
    if n == 0 {
        return Err(Error::InvalidParams("N must be at least 1".into()));
    }
    if !m.is_finite() {
        return Err(Error::InvalidParams(format!("wall M = {m} must be finite")));
    }
    trunc.validate()?;
    PrecisionConfig::new(precision.working_bits)?;
    if m <= 0.0 {
        return Ok(ProbabilityResult::exact_zero(route, precision.working_bits, "M <= 0"));
    }
    with_retry(precision, |p| {
        let bits = p.working_bits;
        let sb = bits + SUM_GUARD;
        let pi = Float::with_val(sb, Constant::Pi);
        let rate = Float::with_val(sb, pi.square_ref()) / (Float::with_val(sb, m) * m * 2u32);
        let env = Envelope {
            exponents: (1..=n)
                .flat_map(|i| (1..=n).map(move |j| (2 * i + 2 * j + base_exp) as f64 - 4.0))
                .collect(),
            decay: rate.to_f64(),
            spacing: 1.0,
        };
        let sums = lattice_sum(&env, trunc, sb, |k| {
            let x = Float::with_val(sb, k) - shift;
            let x2 = Float::with_val(sb, x.square_ref());
            let g = (-Float::with_val(sb, &x2 * &rate)).exp() * 2u32;
            let xp = powers(&x2, 2 * n + base_exp / 2, sb);
            let mut terms = Vec::with_capacity(n * n);
            for i in 1..=n {
                for j in 1..=n {
                    terms.push(Float::with_val(sb, &g * &xp[i + j - 2 + base_exp / 2]));
                }
            }
            Ok((x.to_f64(), terms))
        })?;
        let mat = matrix_from(n, bits, &sums)?;
        let err = sums.rel_errors(sb);
        finish(route, &mat, &err, &ln_pref(sb), 1, sums.n_terms, p)
    })
}

/// Reflecting-wall Brownian form: sums over `Z - 1/2`.
pub fn prob_brownian_reflect(
    n: usize,
    m: f64,
    trunc: &TruncationPolicy,
    precision: &PrecisionConfig,
) -> Result<ProbabilityResult> {
    let ln_pref = |b: u32| {
        let nf = n as f64;
        let mut s = Float::with_val(b, Constant::Log2) * (-nf / 2.0);
        s += Float::with_val(b, Constant::Pi).ln() * (2.0 * nf * nf - 1.5 * nf);
        s -= ln_of(m, b) * (nf * (2.0 * nf - 1.0));
        for k in 0..n as u32 {
            s -= ln_factorial(2 * k, b);
        }
        s
    };
    theta_route(Route::BrownianReflect, n, m, 0.5, 0, ln_pref, trunc, precision)
}

/// Excursion form: sums over `Z` (the origin contributes nothing).
pub fn prob_brownian_excursion(
    n: usize,
    m: f64,
    trunc: &TruncationPolicy,
    precision: &PrecisionConfig,
) -> Result<ProbabilityResult> {
    let ln_pref = |b: u32| {
        let nf = n as f64;
        let mut s = Float::with_val(b, Constant::Log2) * (-nf / 2.0);
        s += Float::with_val(b, Constant::Pi).ln() * (2.0 * nf * nf + 0.5 * nf);
        s -= ln_of(m, b) * (nf * (2.0 * nf + 1.0));
        for k in 0..n as u32 {
            s -= ln_factorial(2 * k + 1, b);
        }
        s
    };
    theta_route(Route::BrownianExcursion, n, m, 0.0, 2, ln_pref, trunc, precision)
}

/// Single path from the origin:
/// `2^{1-alpha} / Gamma(alpha + 1) M^{-2(alpha+1)} sum_n x_n^{2 alpha} e^{-x_n^2/(2M^2)} / J_{alpha+1}(x_n)^2`.
pub fn prob_pitman_yor(
    alpha: f64,
    m: f64,
    trunc: &TruncationPolicy,
    precision: &PrecisionConfig,
) -> Result<ProbabilityResult> {
    prob_pitman_yor_with(alpha, m, trunc, precision, None)
}

pub fn prob_pitman_yor_with(
    alpha: f64,
    m: f64,
    trunc: &TruncationPolicy,
    precision: &PrecisionConfig,
    zeros: Option<&BesselZeroTable>,
) -> Result<ProbabilityResult> {
    let params = ModelParams::new(1, alpha, 0.0, m)?;
    prepare(&params, trunc, precision)?;
    if m <= 0.0 {
        return Ok(ProbabilityResult::exact_zero(Route::PitmanYor, precision.working_bits, "M <= 0"));
    }
    with_retry(precision, |p| {
        let bits = p.working_bits;
        let sb = bits + SUM_GUARD;
        let mut cursor = ZeroCursor::new(alpha, sb, zeros)?;
        let env = Envelope {
            exponents: vec![2.0 * alpha + 1.0],
            decay: 1.0 / (2.0 * m * m),
            spacing: ZERO_SPACING,
        };
        let sums = lattice_sum(&env, trunc, sb, |k| {
            let zw = zero_weights(&mut cursor, k, alpha, m, sb)?;
            let t = Float::with_val(sb, zw.x_alpha.square_ref()) * &zw.w;
            Ok((zw.x.to_f64(), vec![t]))
        })?;
        let mat = matrix_from(1, bits, &sums)?;
        let err = sums.rel_errors(sb);
        let mut ln_pref = Float::with_val(sb, Constant::Log2) * (1.0 - alpha);
        ln_pref -= ln_gamma_float(&Float::with_val(sb, alpha + 1.0), sb)?;
        ln_pref -= ln_of(m, sb) * (2.0 * (alpha + 1.0));
        finish(Route::PitmanYor, &mat, &err, &ln_pref, 1, sums.n_terms, p)
    })
}

/// Evaluates `route` at `params`. Routes with a fixed order or start reject
/// parameters outside their scope.
pub fn evaluate(
    route: Route,
    params: &ModelParams,
    trunc: &TruncationPolicy,
    precision: &PrecisionConfig,
    zeros: Option<&BesselZeroTable>,
) -> Result<ProbabilityResult> {
    params.validate()?;
    let need = |ok: bool, what: &str| -> Result<()> {
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("route {route} requires {what}")))
        }
    };
    match route {
        Route::Thm1 => prob_thm1_with(params, trunc, precision, zeros),
        Route::Thm2Hankel => prob_thm2_hankel_with(params, trunc, precision, zeros),
        Route::BrownianReflect => {
            need(params.alpha == -0.5 && params.start == 0.0, "alpha = -1/2 and a = 0")?;
            prob_brownian_reflect(params.n_paths, params.wall, trunc, precision)
        }
        Route::BrownianExcursion => {
            need(params.alpha == 0.5 && params.start == 0.0, "alpha = 1/2 and a = 0")?;
            prob_brownian_excursion(params.n_paths, params.wall, trunc, precision)
        }
        Route::PitmanYor => {
            need(params.n_paths == 1 && params.start == 0.0, "N = 1 and a = 0")?;
            prob_pitman_yor_with(params.alpha, params.wall, trunc, precision, zeros)
        }
    }
}
