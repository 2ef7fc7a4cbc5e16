//! Karlin-McGregor checks at finite separation.
//!
//! `q(x, y)` and `q^M(x, y)` are determinants of single-path transition
//! densities at time one, without and with an absorbing wall at `M`. Their
//! ratio converges to the distribution of the maximal height as the starts
//! merge at `a` and the ends merge at the origin, which gives a check of the
//! analytic routes that shares none of their algebra.

use rug::float::Constant;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg_xp::{det_report, PrecisionConfig, XMatrix};
use crate::maxdist::lattice::{lattice_sum, Envelope, ZeroCursor, ZERO_SPACING};
use crate::maxdist::{ModelParams, TruncationPolicy};
use crate::specfun::{bessel_i_scaled_mp, bessel_j_mp, gamma_float, BesselZeroTable};

const GUARD: u32 = 24;

/// How the `N` starts and ends spread out from `a` and `0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    /// `x_i = a + (i-1) eps` (`i eps` when `a = 0`), `y_i = i eps`.
    Arithmetic,
    /// `x_i = a + (2^{i-1} - 1) eps` (`2^{i-1} eps` when `a = 0`), `y_i = 2^{i-1} eps`.
    Geometric,
}

/// Start and end points of the `N` paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointConfig {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub eps: f64,
}

impl EndpointConfig {
    pub fn new(x: Vec<f64>, y: Vec<f64>, eps: f64) -> Result<Self> {
        let c = Self { x, y, eps };
        c.validate()?;
        Ok(c)
    }

    pub fn arithmetic(n: usize, a: f64, eps: f64) -> Result<Self> {
        Self::with_geometry(Geometry::Arithmetic, n, a, eps)
    }

    pub fn geometric(n: usize, a: f64, eps: f64) -> Result<Self> {
        Self::with_geometry(Geometry::Geometric, n, a, eps)
    }

    pub fn with_geometry(g: Geometry, n: usize, a: f64, eps: f64) -> Result<Self> {
        let step = |i: usize| match g {
            Geometry::Arithmetic => i as f64,
            Geometry::Geometric => (2f64).powi(i as i32 - 1),
        };
        let x = (1..=n)
            .map(|i| if a > 0.0 { a + (step(i) - step(1)) * eps } else { step(i) * eps })
            .collect();
        let y = (1..=n).map(|i| step(i) * eps).collect();
        Self::new(x, y, eps)
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.x.is_empty() || self.x.len() != self.y.len() {
            return Err(Error::InvalidParams("need the same positive number of starts and ends".into()));
        }
        if !(self.eps.is_finite() && self.eps > 0.0) {
            return Err(Error::InvalidParams(format!("eps = {} must be positive", self.eps)));
        }
        let increasing = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
        if !increasing(&self.x) || !increasing(&self.y) {
            return Err(Error::InvalidParams("starts and ends must be strictly increasing".into()));
        }
        if !(self.x.iter().all(|v| v.is_finite() && *v >= 0.0) && self.y.iter().all(|v| v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidParams("starts must be >= 0 and ends > 0".into()));
        }
        Ok(())
    }
}

fn check_kernel_args(t: f64, y: f64, x: f64, alpha: f64) -> Result<()> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::Domain(format!("time t = {t} must be positive")));
    }
    if !(x.is_finite() && x >= 0.0 && y.is_finite() && y >= 0.0) {
        return Err(Error::Domain(format!("coordinates x = {x}, y = {y} must be >= 0")));
    }
    if !(alpha.is_finite() && alpha > -1.0) {
        return Err(Error::Domain(format!("alpha = {alpha} must exceed -1")));
    }
    Ok(())
}

/// Density `p(t, y | x)` of the Bessel process of order `alpha`.
///
/// For `x > 0` this is `(1/t) (y^{alpha+1}/x^alpha) e^{-(x^2+y^2)/(2t)} I_alpha(xy/t)`,
/// evaluated through `e^{-z} I_alpha(z)`; at `x = 0` it is
/// `y^{2 alpha+1} e^{-y^2/(2t)} / (2^alpha Gamma(alpha+1) t^{alpha+1})`.
pub fn transition_p(t: f64, y: f64, x: f64, alpha: f64, precision: &PrecisionConfig) -> Result<Float> {
    check_kernel_args(t, y, x, alpha)?;
    let bits = precision.working_bits;
    Ok(Float::with_val(bits, p_free(t, y, x, alpha, bits + GUARD)?))
}

fn p_free(t: f64, y: f64, x: f64, alpha: f64, wp: u32) -> Result<Float> {
    let tf = Float::with_val(wp, t);
    let yf = Float::with_val(wp, y);
    let nu = Float::with_val(53, alpha);
    if x == 0.0 {
        let ln_y = Float::with_val(wp, yf.ln_ref());
        let mut ln = ln_y * (2.0 * alpha + 1.0);
        ln -= Float::with_val(wp, yf.square_ref()) / (Float::with_val(wp, &tf) * 2u32);
        ln -= Float::with_val(wp, Constant::Log2) * alpha;
        ln -= Float::with_val(wp, tf.ln_ref()) * (alpha + 1.0);
        let g = gamma_float(&Float::with_val(wp, alpha + 1.0), wp)?;
        return Ok(ln.exp() / g);
    }
    if y == 0.0 {
        return Ok(Float::new(wp));
    }
    let xf = Float::with_val(wp, x);
    let z = Float::with_val(wp, &xf * &yf) / &tf;
    let scaled = bessel_i_scaled_mp(&nu, &z, wp)?;
    // e^{-(x^2+y^2)/(2t)} e^{z} = e^{-(x-y)^2/(2t)}
    let d = Float::with_val(wp, &xf - &yf);
    let mut ln = -(Float::with_val(wp, d.square_ref()) / (Float::with_val(wp, &tf) * 2u32));
    ln += Float::with_val(wp, yf.ln_ref()) * (alpha + 1.0);
    ln -= Float::with_val(wp, xf.ln_ref()) * alpha;
    ln -= tf.ln();
    Ok(ln.exp() * scaled)
}

/// Density with an absorbing wall at `M`, by the eigenfunction expansion
/// `sum_n 2/(M^2 J_{alpha+1}(x_n)^2) (y^{alpha+1}/x^alpha) J_alpha(x_n x/M) J_alpha(x_n y/M) e^{-x_n^2 t/(2M^2)}`
/// over the zeros `x_n` of `J_alpha`.
///
/// The tail is controlled by `e^{-x_n^2 t/(2M^2)}`, so an adaptive policy
/// uses on the order of `M/sqrt(t)` terms; a fixed policy must be sized
/// accordingly by the caller.
#[allow(non_snake_case)]
pub fn transition_pM(
    t: f64,
    y: f64,
    x: f64,
    alpha: f64,
    m: f64,
    trunc: &TruncationPolicy,
    precision: &PrecisionConfig,
) -> Result<Float> {
    transition_pM_with(t, y, x, alpha, m, trunc, precision, None)
}

/// [`transition_pM`] reusing a shared zero table when it is precise enough.
#[allow(non_snake_case, clippy::too_many_arguments)]
pub fn transition_pM_with(
    t: f64,
    y: f64,
    x: f64,
    alpha: f64,
    m: f64,
    trunc: &TruncationPolicy,
    precision: &PrecisionConfig,
    zeros: Option<&BesselZeroTable>,
) -> Result<Float> {
    check_kernel_args(t, y, x, alpha)?;
    check_wall(m, &[x], &[y])?;
    let bits = precision.working_bits;
    let mut cursor = ZeroCursor::new(alpha, bits + GUARD, zeros)?;
    let (sums, _) = wall_matrix(t, &[x], &[y], alpha, m, trunc, bits + GUARD, &mut cursor)?;
    Ok(Float::with_val(bits, &sums[0]))
}

fn check_wall(m: f64, x: &[f64], y: &[f64]) -> Result<()> {
    if !(m.is_finite() && m > 0.0) {
        return Err(Error::Domain(format!("wall M = {m} must be positive")));
    }
    if x.iter().chain(y).any(|v| *v > m) {
        return Err(Error::Domain(format!("coordinates must not exceed the wall M = {m}")));
    }
    Ok(())
}

/// Entries `p^M(t, y_j | x_i)` in row-major order with relative error bounds.
#[allow(clippy::too_many_arguments)]
fn wall_matrix(
    t: f64,
    x: &[f64],
    y: &[f64],
    alpha: f64,
    m: f64,
    trunc: &TruncationPolicy,
    wp: u32,
    cursor: &mut ZeroCursor<'_>,
) -> Result<(Vec<Float>, Vec<f64>)> {
    let n = x.len();
    let nu = Float::with_val(53, alpha);
    let mf = Float::with_val(wp, m);
    let rate = Float::with_val(wp, t) / (Float::with_val(wp, mf.square_ref()) * 2u32);
    let two_m2 = Float::with_val(wp, 2u32) / Float::with_val(wp, mf.square_ref());
    let xs: Vec<Float> = x.iter().map(|v| Float::with_val(wp, *v)).collect();
    let ys: Vec<Float> = y.iter().map(|v| Float::with_val(wp, *v)).collect();
    let y_pow: Vec<Float> = ys.iter().map(|v| Float::with_val(wp, v.ln_ref()) * (alpha + 1.0)).map(|l| l.exp()).collect();
    let inv_gamma = Float::with_val(wp, 1) / gamma_float(&Float::with_val(wp, alpha + 1.0), wp)?;
    let env = Envelope {
        exponents: vec![1.0; n * n],
        decay: rate.to_f64(),
        spacing: ZERO_SPACING,
    };
    let sums = lattice_sum(&env, trunc, wp, |k| {
        let (zk, jn1) = cursor.get(k)?;
        let zk = Float::with_val(wp, zk);
        let c = Float::with_val(wp, &two_m2 / Float::with_val(wp, jn1.square_ref()))
            * (-Float::with_val(wp, zk.square_ref()) * &rate).exp();
        let scaled = Float::with_val(wp, &zk / &mf);
        let mut f = Vec::with_capacity(n);
        for xi in &xs {
            if xi.is_zero() {
                // J_alpha(z x / M) / x^alpha -> (z / 2M)^alpha / Gamma(alpha + 1)
                let half = Float::with_val(wp, &scaled / 2u32);
                f.push(Float::with_val(wp, half.ln_ref()) * alpha);
                let last = f.last_mut().expect("just pushed");
                *last = Float::with_val(wp, last.exp_ref()) * &inv_gamma;
            } else {
                let arg = Float::with_val(wp, &scaled * xi);
                let j = bessel_j_mp(&nu, &arg, wp)?;
                let xa = (Float::with_val(wp, xi.ln_ref()) * alpha).exp();
                f.push(j / xa);
            }
        }
        let mut g = Vec::with_capacity(n);
        for (yj, yp) in ys.iter().zip(&y_pow) {
            let arg = Float::with_val(wp, &scaled * yj);
            g.push(bessel_j_mp(&nu, &arg, wp)? * yp);
        }
        let mut terms = Vec::with_capacity(n * n);
        for fi in &f {
            let cf = Float::with_val(wp, &c * fi);
            for gj in &g {
                terms.push(Float::with_val(wp, &cf * gj));
            }
        }
        Ok((zk.to_f64(), terms))
    })?;
    let rel = sums.rel_errors(wp);
    Ok((sums.sums, rel))
}

/// Image sum for order `-1/2` (reflection at 0, absorption at `M`):
/// `sum_{|n| <= n_images} (-1)^n (2 pi t)^{-1/2} [e^{-(y-x-2nM)^2/(2t)} + e^{-(y+x+2nM)^2/(2t)}]`.
#[allow(non_snake_case)]
pub fn transition_pM_images(t: f64, y: f64, x: f64, m: f64, n_images: usize, precision: &PrecisionConfig) -> Result<Float> {
    check_kernel_args(t, y, x, -0.5)?;
    if !(m.is_finite() && m > 0.0) {
        return Err(Error::Domain(format!("wall M = {m} must be positive")));
    }
    let wp = precision.working_bits + GUARD;
    let two_t = Float::with_val(wp, t) * 2u32;
    let gauss = |d: Float| -> Float { (-(d.square() / &two_t)).exp() };
    let mut s = Float::new(wp);
    let k = n_images as i64;
    for n in -k..=k {
        let shift = Float::with_val(wp, m) * (2 * n);
        let d1 = Float::with_val(wp, y - x) - &shift;
        let d2 = Float::with_val(wp, y + x) + &shift;
        let pair = gauss(d1) + gauss(d2);
        if n % 2 == 0 {
            s += pair;
        } else {
            s -= pair;
        }
    }
    let norm = (Float::with_val(wp, Constant::Pi) * &two_t).sqrt();
    Ok(Float::with_val(precision.working_bits, s / norm))
}

/// `q(x, y) = det[p(1, y_j | x_i)]` as `(sign, ln |q|)`.
pub fn km_q(endpoints: &EndpointConfig, alpha: f64, precision: &PrecisionConfig) -> Result<(i8, f64)> {
    let r = q_free(endpoints, alpha, precision.working_bits)?;
    Ok((r.0, r.1))
}

/// `q^M(x, y) = det[p^M(1, y_j | x_i)]` as `(sign, ln |q^M|)`.
#[allow(non_snake_case)]
pub fn km_qM(
    endpoints: &EndpointConfig,
    alpha: f64,
    m: f64,
    trunc: &TruncationPolicy,
    precision: &PrecisionConfig,
) -> Result<(i8, f64)> {
    let r = q_wall(endpoints, alpha, m, trunc, precision.working_bits, None)?;
    Ok((r.0, r.1))
}

/// `(sign, ln |det|, estimated relative error)`.
type DetOut = (i8, f64, f64);

/// The matrix `[p(1, y_j | x_i)]` behind [`km_q`].
pub fn km_q_matrix(endpoints: &EndpointConfig, alpha: f64, precision: &PrecisionConfig) -> Result<XMatrix> {
    free_matrix(endpoints, alpha, precision.working_bits)
}

fn free_matrix(e: &EndpointConfig, alpha: f64, bits: u32) -> Result<XMatrix> {
    e.validate()?;
    let n = e.n();
    let wp = bits + GUARD;
    let mut entries = Vec::with_capacity(n * n);
    for &xi in &e.x {
        for &yj in &e.y {
            check_kernel_args(1.0, yj, xi, alpha)?;
            entries.push(p_free(1.0, yj, xi, alpha, wp)?);
        }
    }
    XMatrix::from_fn(n, n, bits, |i, j| entries[i * n + j].clone())
}

fn q_free(e: &EndpointConfig, alpha: f64, bits: u32) -> Result<DetOut> {
    let mat = free_matrix(e, alpha, bits)?;
    let n = e.n();
    let err = vec![(-((bits + GUARD) as f64)).exp2() * 16.0; n * n];
    let d = det_report(&mat, &PrecisionConfig::new(bits)?, Some(&err))?;
    Ok((d.sign, d.log_abs_f64(), d.rel_err_est))
}

fn q_wall(
    e: &EndpointConfig,
    alpha: f64,
    m: f64,
    trunc: &TruncationPolicy,
    bits: u32,
    zeros: Option<&BesselZeroTable>,
) -> Result<DetOut> {
    e.validate()?;
    check_kernel_args(1.0, e.y[0], e.x[0], alpha)?;
    check_wall(m, &e.x, &e.y)?;
    let n = e.n();
    let wp = bits + GUARD;
    let mut cursor = ZeroCursor::new(alpha, wp, zeros)?;
    let (sums, rel) = wall_matrix(1.0, &e.x, &e.y, alpha, m, trunc, wp, &mut cursor)?;
    let mat = XMatrix::from_fn(n, n, bits, |i, j| sums[i * n + j].clone())?;
    let d = det_report(&mat, &PrecisionConfig::new(bits)?, Some(&rel))?;
    Ok((d.sign, d.log_abs_f64(), d.rel_err_est))
}

/// Working precision for separation `eps`: twice the double-double default,
/// plus room for the `eps^{N(N-1)}` cancellation in both determinants.
pub fn km_bits(n: usize, eps: f64, precision: &PrecisionConfig) -> u32 {
    let lost = (n * n) as f64 * (1.0 / eps).log2().max(0.0);
    let want = (2 * precision.working_bits.max(PrecisionConfig::DOUBLE_DOUBLE)) as f64 + lost;
    (want.ceil() as u32).clamp(PrecisionConfig::MIN_ARBITRARY, PrecisionConfig::MAX_BITS)
}

/// Relative error above which a ratio is recomputed at doubled precision.
const RATIO_REL_TOL: f64 = 1e-10;

/// `q^M / q` at each `eps` along the arithmetic geometry.
pub fn km_ratio_limit(params: &ModelParams, eps_sequence: &[f64], precision: &PrecisionConfig) -> Result<Vec<f64>> {
    km_ratio_limit_geometry(params, eps_sequence, Geometry::Arithmetic, precision)
}

/// `q^M / q` at each `eps` for the chosen geometry.
///
/// When either determinant's error estimate exceeds the tolerance the
/// evaluation is repeated at twice the precision; running out of precision
/// is a convergence error.
pub fn km_ratio_limit_geometry(
    params: &ModelParams,
    eps_sequence: &[f64],
    geometry: Geometry,
    precision: &PrecisionConfig,
) -> Result<Vec<f64>> {
    params.validate()?;
    if eps_sequence.is_empty() || eps_sequence.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParams("eps sequence must be non-empty and strictly decreasing".into()));
    }
    let n = params.n_paths;
    let mut out = Vec::with_capacity(eps_sequence.len());
    for &eps in eps_sequence {
        let e = EndpointConfig::with_geometry(geometry, n, params.start, eps)?;
        if params.wall_not_above_start() || e.x.iter().chain(&e.y).any(|v| *v >= params.wall) {
            out.push(0.0);
            continue;
        }
        let mut bits = km_bits(n, eps, precision);
        loop {
            let trunc = TruncationPolicy::TailTol {
                tail_tol: (-(bits as f64)).exp2().max(1e-300),
                n_max_cap: TruncationPolicy::DEFAULT_CAP,
            };
            let (s0, l0, e0) = q_free(&e, params.alpha, bits)?;
            let (s1, l1, e1) = q_wall(&e, params.alpha, params.wall, &trunc, bits, None)?;
            if s0 != 0 && e0 + e1 <= RATIO_REL_TOL {
                out.push((s0 * s1) as f64 * (l1 - l0).exp());
                break;
            }
            if bits * 2 > PrecisionConfig::MAX_BITS {
                return Err(Error::Convergence(format!(
                    "q lost all significant digits at eps = {eps} (relative error {:.1e} at {bits} bits)",
                    e0 + e1
                )));
            }
            bits *= 2;
        }
    }
    Ok(out)
}

/// Polynomial extrapolation to `eps = 0` of a sequence `r(eps_k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Richardson {
    /// `estimates[k]` uses the first `k + 1` points.
    pub estimates: Vec<f64>,
    /// Difference of the last two estimates.
    pub residual: f64,
}

impl Richardson {
    pub fn limit(&self) -> f64 {
        *self.estimates.last().expect("at least one point")
    }
}

/// Neville extrapolation of `values` at `eps` to zero.
pub fn richardson_limit(eps: &[f64], values: &[f64]) -> Result<Richardson> {
    if eps.is_empty() || eps.len() != values.len() {
        return Err(Error::InvalidParams("eps and values must have the same non-zero length".into()));
    }
    let n = eps.len();
    let mut estimates = Vec::with_capacity(n);
    let mut p = values.to_vec();
    estimates.push(p[0]);
    // After round r, p[i] interpolates points i..=i+r at zero.
    for r in 1..n {
        for i in 0..n - r {
            let (h0, h1) = (eps[i], eps[i + r]);
            p[i] = (h0 * p[i + 1] - h1 * p[i]) / (h0 - h1);
        }
        estimates.push(p[0]);
    }
    let residual = if n > 1 { (estimates[n - 1] - estimates[n - 2]).abs() } else { f64::INFINITY };
    Ok(Richardson { estimates, residual })
}
