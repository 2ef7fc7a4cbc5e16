use bessel_paths::maxdist::*;
use bessel_paths::specfun::{bessel_zeros_with_bits, gamma_fn};
use bessel_paths::{Error, PrecisionConfig};

fn p106() -> PrecisionConfig {
    PrecisionConfig::double_double()
}

fn tt() -> TruncationPolicy {
    TruncationPolicy::default()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn thm1(n: usize, alpha: f64, a: f64, m: f64) -> ProbabilityResult {
    prob_thm1(&ModelParams::new(n, alpha, a, m).unwrap(), &tt(), &p106()).unwrap()
}

#[test]
fn determinant_and_hankel_routes_agree() {
    for &(n, alpha, a, m) in &[
        (1, 0.5, 1.0, 2.0),
        (2, 0.7, 0.9, 4.0),
        (3, -0.4, 0.5, 1.5),
        (4, 2.3, 2.0, 5.0),
        (3, 1.0, 0.0, 3.0),
        (5, -0.4, 0.0, 4.0),
    ] {
        let params = ModelParams::new(n, alpha, a, m).unwrap();
        let r1 = prob_thm1(&params, &tt(), &p106()).unwrap();
        let r2 = prob_thm2_hankel(&params, &tt(), &p106()).unwrap();
        let d = (r1.value - r2.value).abs() / r1.value.max(1e-12);
        assert!(d <= 1e-8, "{params:?}: {} vs {}", r1.value, r2.value);
    }
}

#[test]
fn hankel_sign_exponent_is_integral_and_matches_determinant_route() {
    for n in 1..=12 {
        assert!(hankel_sign_exponent(n).is_ok(), "N = {n}");
    }
    // Positivity of both routes over N = 1..12 pins down the sign.
    for n in 1..=12 {
        let params = ModelParams::new(n, 1.0, 1.0, 1.0 + 1.5 * (n as f64).sqrt() + 1.0).unwrap();
        let r1 = prob_thm1(&params, &tt(), &p106()).unwrap();
        let r2 = prob_thm2_hankel(&params, &tt(), &p106()).unwrap();
        assert_eq!(r1.sign, 1, "N = {n}");
        assert_eq!(r2.sign, 1, "N = {n}");
        assert!(rel(r1.value, r2.value) < 1e-8, "N = {n}: {} vs {}", r1.value, r2.value);
    }
}

#[test]
fn half_integer_orders_reduce_to_theta_sums() {
    for n in 1..=3 {
        for m in [2.0, 4.0] {
            let t = thm1(n, -0.5, 0.0, m);
            let r = prob_brownian_reflect(n, m, &tt(), &p106()).unwrap();
            assert!(rel(r.value, t.value) < 1e-10, "reflect N={n} M={m}: {} vs {}", r.value, t.value);
            let t = thm1(n, 0.5, 0.0, m);
            let e = prob_brownian_excursion(n, m, &tt(), &p106()).unwrap();
            assert!(rel(e.value, t.value) < 1e-10, "excursion N={n} M={m}: {} vs {}", e.value, t.value);
        }
    }
}

#[test]
fn single_path_forms_agree() {
    for m in [1.0, 2.0, 3.5] {
        let py = prob_pitman_yor(0.5, m, &tt(), &p106()).unwrap();
        let ex = prob_brownian_excursion(1, m, &tt(), &p106()).unwrap();
        assert!(rel(py.value, ex.value) < 1e-12, "M={m}");
        let t0 = thm1(1, 0.5, 0.0, m);
        assert!(rel(py.value, t0.value) < 1e-14);
        let ts = thm1(1, 0.5, 1e-6, m);
        assert!(rel(py.value, ts.value) < 1e-10, "M={m}: {} vs {}", ts.value, py.value);
    }
}

#[test]
fn pitman_yor_is_monotone_in_wall() {
    let mut prev = 0.0;
    for k in 0..=10 {
        let m = 1.0 + 0.5 * k as f64;
        let r = prob_pitman_yor(0.5, m, &tt(), &p106()).unwrap();
        assert!(r.value >= prev - r.est_error, "M={m}");
        prev = r.value;
    }
}

#[test]
fn cdf_is_monotone_in_wall_and_start() {
    let zeros = bessel_zeros_with_bits(1.0, 64, 1e-14, 200).unwrap();
    let p = p106();
    for route in [Route::Thm1, Route::Thm2Hankel] {
        let mut prev = -1.0;
        for k in 0..=12 {
            let m = 1.25 + 0.25 * k as f64;
            let params = ModelParams::new(3, 1.0, 1.0, m).unwrap();
            let r = evaluate(route, &params, &tt(), &p, Some(&zeros)).unwrap();
            assert!(r.value >= prev - r.est_error, "{route} M={m}: {} < {prev}", r.value);
            prev = r.value;
        }
        let mut prev = 2.0;
        for k in 0..=8 {
            let a = 0.25 + 0.25 * k as f64;
            let params = ModelParams::new(3, 1.0, a, 3.0).unwrap();
            let r = evaluate(route, &params, &tt(), &p, Some(&zeros)).unwrap();
            assert!(r.value <= prev + r.est_error, "{route} a={a}: {} > {prev}", r.value);
            prev = r.value;
        }
    }
}

#[test]
fn limits_in_the_wall() {
    for &(n, alpha, a) in &[(1, 1.0, 1.0), (2, 0.3, 0.5), (3, 1.0, 1.0)] {
        let far = thm1(n, alpha, a, a + 10.0 * (n as f64).sqrt());
        assert!(far.value >= 1.0 - 1e-6 && far.value <= 1.0 + far.est_error + 1e-12, "{}", far.value);
        // For one path P(max < a + d) is of order a d, so check the trend.
        let near: Vec<f64> = [0.2, 0.1, 0.05, 0.025].iter().map(|d| thm1(n, alpha, a, a + d).value).collect();
        assert!(near.windows(2).all(|w| w[1] < w[0]), "N={n}: {near:?}");
        assert!(near[3].abs() < 0.05, "N={n}: {near:?}");
        let at = thm1(n, alpha, a, a);
        assert_eq!(at.value, 0.0);
        assert!(at.note.is_some());
    }
}

#[test]
fn raw_value_lies_within_error_of_unit_interval() {
    for &(n, alpha, a, m) in &[(2, 1.0, 1.0, 1.5), (4, 0.0, 0.5, 8.0), (3, 1.0, 0.0, 1.0)] {
        let r = thm1(n, alpha, a, m);
        assert!(r.value >= -r.est_error && r.value <= 1.0 + r.est_error, "{r:?}");
        assert!(r.est_error.is_finite() && r.est_error >= 0.0);
    }
}

#[test]
fn small_start_approaches_origin_formula() {
    let small = thm1(2, 1.0, 1e-3, 4.0);
    let origin = thm1(2, 1.0, 0.0, 4.0);
    assert!(rel(small.value, origin.value) < 5e-3, "{} vs {}", small.value, origin.value);
}

#[test]
fn single_moments_are_positive_and_log_convex() {
    let params = ModelParams::new(1, 1.3, 0.0, 2.5).unwrap();
    let t = moments_single(&params, 8, &tt(), &p106()).unwrap();
    assert_eq!(t.kind, MomentKind::Single);
    assert_eq!(t.mt.len(), 9);
    for k in 0..t.mt.len() {
        assert!(t.mt[k].is_sign_positive() && !t.mt[k].is_zero());
    }
    for k in 0..t.mt.len() - 2 {
        let lhs = t.mt[k].to_f64() * t.mt[k + 2].to_f64();
        let rhs = t.mt[k + 1].to_f64().powi(2);
        assert!(lhs >= rhs, "k={k}");
    }
}

#[test]
fn first_single_moment_at_half_order_matches_closed_form() {
    // J_{3/2}(n pi)^2 = 2 / (n pi^2), so each term is (n pi)^3 e^{-(n pi)^2/18} n pi^2 / 2.
    let pi = std::f64::consts::PI;
    let direct: f64 = (1..200)
        .map(|n| {
            let x = n as f64 * pi;
            let j2 = 2.0 / (n as f64 * pi * pi);
            x * x * x * (-x * x / 18.0).exp() / j2
        })
        .sum();
    let params = ModelParams::new(1, 0.5, 0.0, 3.0).unwrap();
    let t = moments_single(&params, 1, &tt(), &p106()).unwrap();
    assert!(rel(t.mt[1].to_f64(), direct) < 1e-13, "{} vs {direct}", t.mt[1].to_f64());
}

#[test]
fn moment_pair_survives_refinement() {
    let params = ModelParams::new(1, 1.0, 1.0, 5.0).unwrap();
    let coarse = moments_mop(&params, 3, &tt(), &p106()).unwrap();
    let fine = moments_mop(&params, 3, &tt().refined(), &PrecisionConfig::new(212).unwrap()).unwrap();
    assert_eq!(coarse.kind, MomentKind::MopPair);
    let (c, f) = (coarse.m1[2].to_f64(), fine.m1[2].to_f64());
    assert!(rel(c, f) < 1e-12, "{c} vs {f}");
    assert!(fine.n_terms_used >= coarse.n_terms_used);
}

#[test]
fn moment_pair_tends_to_single_weight_for_small_start() {
    for alpha in [-0.5, 1.0] {
        let (a, m) = (1e-4, 3.0);
        let pair = moments_mop(&ModelParams::new(1, alpha, a, m).unwrap(), 0, &tt(), &p106()).unwrap();
        let single = moments_single(&ModelParams::new(1, alpha, 0.0, m).unwrap(), 0, &tt(), &p106()).unwrap();
        let g = gamma_fn(alpha + 1.0, &p106()).unwrap().to_f64();
        let factor = (a / (2.0 * m)).powf(alpha) / g;
        let expect = factor * single.mt[0].to_f64();
        assert!(rel(pair.m1[0].to_f64(), expect) < 1e-5, "alpha={alpha}");
    }
}

#[test]
fn moment_inputs_are_checked() {
    let at_origin = ModelParams::new(1, 1.0, 0.0, 3.0).unwrap();
    assert!(moments_mop(&at_origin, 2, &tt(), &p106()).is_err());
    let positive = ModelParams::new(1, 1.0, 1.0, 3.0).unwrap();
    assert!(moments_single(&positive, 2, &tt(), &p106()).is_err());
    let wall_at_start = ModelParams::new(1, 1.0, 3.0, 3.0).unwrap();
    assert!(moments_mop(&wall_at_start, 2, &tt(), &p106()).is_err());
}

#[test]
fn invalid_parameters_are_rejected() {
    assert!(matches!(ModelParams::new(2, -1.0, 0.0, 1.0), Err(Error::InvalidParams(_))));
    assert!(ModelParams::new(0, 1.0, 0.0, 1.0).is_err());
    assert!(ModelParams::new(1, 1.0, -0.1, 1.0).is_err());
    let params = ModelParams::new(1, 1.0, 0.0, 1.0).unwrap();
    assert!(evaluate(Route::BrownianReflect, &params, &tt(), &p106(), None).is_err());
    assert!(prob_thm1(&params, &TruncationPolicy::fixed(0), &p106()).is_err());
}

#[test]
fn theta_sums_have_the_right_limits() {
    let r = prob_brownian_reflect(1, 40.0, &tt(), &p106()).unwrap();
    assert!((r.value - 1.0).abs() < 1e-15);
    let e = prob_brownian_excursion(1, 40.0, &tt(), &p106()).unwrap();
    assert!((e.value - 1.0).abs() < 1e-15);
    let a = prob_brownian_reflect(1, 2.0, &TruncationPolicy::fixed(20), &p106()).unwrap();
    let b = prob_brownian_reflect(1, 2.0, &TruncationPolicy::fixed(40), &p106()).unwrap();
    assert!(rel(a.value, b.value) < 1e-15);
    // Kolmogorov: P(sup |bridge| < M) = 1 - 2 sum (-1)^{k-1} e^{-2 k^2 M^2}.
    let k: f64 = 1.0 - 2.0 * (1..20).map(|k| (-1f64).powi(k - 1) * (-2.0 * (k * k) as f64 * 4.0).exp()).sum::<f64>();
    assert!(rel(a.value, k) < 1e-14, "{} vs {k}", a.value);
}

#[test]
fn truncation_and_precision_refinement_stay_within_error() {
    let params = ModelParams::new(4, 1.0, 1.0, 3.0).unwrap();
    let base = prob_thm1(&params, &tt(), &p106()).unwrap();
    let more_terms = prob_thm1(&params, &TruncationPolicy::fixed(2 * base.n_terms_used), &p106()).unwrap();
    let more_bits = prob_thm1(&params, &tt(), &PrecisionConfig::new(212).unwrap()).unwrap();
    assert!((more_terms.value - base.value).abs() <= base.est_error, "{base:?} {more_terms:?}");
    assert!((more_bits.value - base.value).abs() <= base.est_error);
    let low = prob_thm1(&params, &tt(), &PrecisionConfig::double()).unwrap();
    assert!((low.value - more_bits.value).abs() <= low.est_error, "{low:?}");
}

#[test]
fn results_are_deterministic() {
    let a = thm1(3, 0.7, 0.4, 2.0);
    let b = thm1(3, 0.7, 0.4, 2.0);
    assert_eq!(a, b);
}
