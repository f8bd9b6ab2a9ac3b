//! Property tests for the algebraic invariants the modules promise.

use nemcast_core::cdf::PredictiveCdf;
use nemcast_core::forest::{fit_forest, ForestHyperparams};
use nemcast_core::metrics;
use nemcast_core::postprocess::smooth_series;
use nemcast_core::qr::{fit_qr, pinball_loss, predict_qr};
use nemcast_core::spike::rolling_quantile;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    /// Scaling targets by a positive factor scales the pinball optimum and
    /// the fitted values by the same factor.
    #[test]
    fn qr_positive_scale_equivariance(
        ys in prop::collection::vec(-50.0f64..50.0, 12..40),
        lambda in 0.5f64..4.0,
        q in 0.1f64..0.9,
    ) {
        let n = ys.len();
        let rows: Vec<f64> = (0..n).flat_map(|i| [1.0, (i as f64 * 0.37).sin()]).collect();
        let base = fit_qr(&rows, 2, &ys, q).unwrap();
        let scaled_y: Vec<f64> = ys.iter().map(|v| v * lambda).collect();
        let scaled = fit_qr(&rows, 2, &scaled_y, q).unwrap();
        prop_assert!((scaled.objective - lambda * base.objective).abs()
            <= 1e-6 * (1.0 + scaled.objective.abs()));
        let pa = predict_qr(&base, &rows, 2).unwrap();
        let pb = predict_qr(&scaled, &rows, 2).unwrap();
        for (a, b) in pa.iter().zip(&pb) {
            prop_assert!((b - lambda * a).abs() <= 1e-5 * (1.0 + b.abs()));
        }
    }

    /// The LP optimum never exceeds the all-zero coefficient objective.
    #[test]
    fn qr_objective_bounded_by_zero_vector(
        ys in prop::collection::vec(-30.0f64..30.0, 8..32),
        q in 0.05f64..0.95,
    ) {
        let n = ys.len();
        let rows: Vec<f64> = (0..n).flat_map(|i| [1.0, (i as f64).cos()]).collect();
        let model = fit_qr(&rows, 2, &ys, q).unwrap();
        let zero: f64 = ys.iter().map(|&y| pinball_loss(y, 0.0, q)).sum();
        prop_assert!(model.objective <= zero + 1e-8);
    }

    /// Forest weights always sum to one and quantiles are monotone in q.
    #[test]
    fn forest_weights_and_monotonicity(seed in 0u64..500) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = 40;
        let rows: Vec<f64> = (0..n * 2).map(|_| rng.random_range(-1.0f64..1.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0f64..10.0)).collect();
        let hyper = ForestHyperparams { n_trees: 5, min_leaf: 3, ..ForestHyperparams::default() };
        let forest = fit_forest(&rows, 2, &y, &hyper, seed).unwrap();
        let x = [rng.random_range(-1.0f64..1.0), rng.random_range(-1.0f64..1.0)];
        let total: f64 = forest.weights(&x).iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
        let mut prev = f64::NEG_INFINITY;
        for q in [0.05, 0.25, 0.5, 0.75, 0.95] {
            let v = forest.predict_quantile(&x, q).unwrap();
            prop_assert!(v >= prev);
            prev = v;
        }
    }

    /// CRPS is nonnegative and zero exactly for the point mass at y.
    #[test]
    fn crps_nonnegative(
        mut vals in prop::collection::vec(-100.0f64..100.0, 9),
        y in -120.0f64..120.0,
    ) {
        vals.sort_by(f64::total_cmp);
        let cdf = PredictiveCdf::new(vals).unwrap();
        prop_assert!(cdf.crps(y) >= 0.0);
        let point = PredictiveCdf::new(vec![y; 9]).unwrap();
        prop_assert!(point.crps(y) == 0.0);
    }

    /// Median pinball is exactly half the absolute error, pointwise.
    #[test]
    fn median_pinball_half_abs_error(y in -50.0f64..50.0, pred in -50.0f64..50.0) {
        prop_assert!(metrics::pinball(y, pred, 0.5) == (y - pred).abs() / 2.0);
    }

    /// Smoothing is linear in its input.
    #[test]
    fn smoothing_linearity(
        a in prop::collection::vec(-10.0f64..10.0, 30),
        b in prop::collection::vec(-10.0f64..10.0, 30),
        ca in -2.0f64..2.0,
        cb in -2.0f64..2.0,
    ) {
        let combo: Vec<f64> = a.iter().zip(&b).map(|(x, y)| ca * x + cb * y).collect();
        let sa = smooth_series(&a, 12).unwrap();
        let sb = smooth_series(&b, 12).unwrap();
        let sc = smooth_series(&combo, 12).unwrap();
        for t in 0..30 {
            prop_assert!((sc[t] - (ca * sa[t] + cb * sb[t])).abs() <= 1e-9);
        }
    }

    /// Rolling quantiles agree with a direct sort of the window.
    #[test]
    fn rolling_quantile_matches_sort(
        values in prop::collection::vec(-100.0f64..100.0, 30..80),
        level in 0.05f64..0.95,
    ) {
        let window = 16;
        let out = rolling_quantile(&values, window, level).unwrap();
        for t in window..values.len() {
            let oracle = nemcast_core::quantile::type7(&values[t - window..t], level);
            let got = out[t].unwrap();
            prop_assert!((got - oracle).abs() <= 1e-9 * (1.0 + oracle.abs()));
        }
    }
}
