use bessel_paths::maxdist::{prob_brownian_reflect, prob_pitman_yor, prob_thm1, ModelParams, TruncationPolicy};
use bessel_paths::mc_oracle::*;
use bessel_paths::PrecisionConfig;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn p() -> PrecisionConfig {
    PrecisionConfig::double_double()
}

fn tt() -> TruncationPolicy {
    TruncationPolicy::default()
}

#[test]
fn analytic_value_is_inside_the_normal_interval_for_most_seeds() {
    let exact = prob_pitman_yor(0.5, 2.0, &tt(), &p()).unwrap().value;
    let mut inside = 0;
    for seed in 0..20 {
        let cfg = McConfig {
            dim: 3,
            start: 0.0,
            grid_points: 1 << 12,
            samples: 4000,
            seed,
            wall: 2.0,
        };
        let e = estimate_cdf(&cfg).unwrap();
        if (e.p_hat - exact).abs() <= 2.576 * e.std_err {
            inside += 1;
        }
    }
    assert!(inside >= 18, "{inside} of 20");
}

#[test]
fn bridge_maximum_median_matches_the_reflecting_formula() {
    // Median of the sup of |Brownian bridge| (Kolmogorov law).
    let median = 0.827_573;
    let at = prob_brownian_reflect(1, median, &tt(), &p()).unwrap().value;
    assert!((at - 0.5).abs() < 1e-5, "{at}");
    let via_thm1 = prob_thm1(&ModelParams::new(1, -0.5, 0.0, median).unwrap(), &tt(), &p()).unwrap().value;
    assert!((at - via_thm1).abs() < 1e-12);

    let cfg = McConfig {
        dim: 1,
        start: 0.0,
        grid_points: 1 << 10,
        samples: 1,
        seed: 11,
        wall: 1.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut draws: Vec<f64> = (0..4000).map(|_| sample_bridge_max(&cfg, &mut rng).unwrap()).collect();
    draws.sort_by(f64::total_cmp);
    let emp = 0.5 * (draws[1999] + draws[2000]);
    let p_emp = prob_thm1(&ModelParams::new(1, -0.5, 0.0, emp).unwrap(), &tt(), &p()).unwrap().value;
    // Sampling error of the median plus the grid bias of order sqrt(1/1024).
    assert!((p_emp - 0.5).abs() < 0.07, "empirical median {emp} has P = {p_emp}");
}

#[test]
fn positive_start_in_two_dimensions_matches_the_determinant_route() {
    let cfg = McConfig {
        dim: 2,
        start: 0.5,
        grid_points: 1 << 11,
        samples: 4000,
        seed: 5,
        wall: 1.5,
    };
    let e = estimate_cdf(&cfg).unwrap();
    let exact = prob_thm1(&ModelParams::new(1, 0.0, 0.5, 1.5).unwrap(), &tt(), &p()).unwrap().value;
    assert!(
        (e.p_hat - exact).abs() <= 3.0 * e.std_err + e.grid_bias_bracket,
        "{e:?} vs {exact}"
    );
}

#[test]
fn coarser_grids_overestimate_on_average() {
    let mean = |grid: usize| -> f64 {
        (0..5)
            .map(|seed| {
                let cfg = McConfig {
                    dim: 3,
                    start: 0.0,
                    grid_points: grid,
                    samples: 2000,
                    seed: 100 + seed,
                    wall: 1.2,
                };
                estimate_cdf(&cfg).unwrap().p_hat
            })
            .sum::<f64>()
            / 5.0
    };
    let coarse = mean(1 << 10);
    let fine = mean(1 << 12);
    assert!(coarse > fine, "{coarse} <= {fine}");
}
