//! Linear quantile regression by exact linear programming.
//!
//! Fitting level `q` minimises the summed pinball loss. The primal splits
//! each residual into nonnegative parts `u+`, `u-` with free coefficients;
//! its basis would be one row per observation, so we solve the equivalent
//! bounded dual instead — `max y'a` subject to `X'a = 0`, `a in [q-1, q]` —
//! whose basis is one row per *column*. The fitted coefficients are the
//! negated simplex multipliers, and the optimum is bit-for-bit the pinball
//! optimum by strong duality.

use alloc::vec::Vec;

use crate::features::DesignMatrix;
use crate::simplex::{self, BoundedLp, LpStatus, SimplexOptions};
use crate::{Error, Result};

/// Fitted conditional-quantile model; `coefficients[0]` pairs with the
/// intercept column.
#[derive(Debug, Clone, PartialEq)]
pub struct QrModel {
    pub level: f64,
    pub coefficients: Vec<f64>,
    /// Training objective: the summed pinball loss at the optimum.
    pub objective: f64,
    /// The design matrix had linearly dependent columns; the coefficients are
    /// the pivot-rule-determined basic solution.
    pub rank_deficient: bool,
}

/// Pinball loss of a single (observation, prediction) pair.
pub fn pinball_loss(y: f64, pred: f64, q: f64) -> f64 {
    if pred <= y {
        (y - pred) * q
    } else {
        (pred - y) * (1.0 - q)
    }
}

fn pinball_sum(rows: &[f64], width: usize, y: &[f64], beta: &[f64], q: f64) -> f64 {
    y.iter()
        .enumerate()
        .map(|(i, &yi)| {
            let row = &rows[i * width..(i + 1) * width];
            let pred: f64 = row.iter().zip(beta).map(|(a, b)| a * b).sum();
            pinball_loss(yi, pred, q)
        })
        .sum()
}

/// Fit level-`q` coefficients on a row-major matrix whose first column is the
/// intercept.
pub fn fit_qr(rows: &[f64], width: usize, y: &[f64], q: f64) -> Result<QrModel> {
    if !(0.0 < q && q < 1.0) {
        return Err(Error::invalid("quantile level must lie in (0, 1)"));
    }
    let n = y.len();
    if width == 0 || rows.len() != n * width {
        return Err(Error::DimensionMismatch(alloc::format!(
            "matrix of {} entries does not factor as {n} x {width}",
            rows.len()
        )));
    }
    if n < width {
        return Err(Error::InsufficientHistory {
            required: width,
            available: n,
        });
    }
    if y.iter().any(|v| !v.is_finite()) || rows.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite entries in regression inputs"));
    }
    // Degenerate all-equal targets: the constant fit is optimal at any level.
    if y.windows(2).all(|w| w[0] == w[1]) {
        let mut beta = alloc::vec![0.0; width];
        beta[0] = y[0];
        return Ok(QrModel {
            level: q,
            coefficients: beta,
            objective: 0.0,
            rank_deficient: false,
        });
    }

    // Dual: min (-y)'a  s.t.  X'a = 0,  q-1 <= a <= q.
    let mut a = alloc::vec![0.0f64; width * n];
    for i in 0..n {
        for j in 0..width {
            a[j * n + i] = rows[i * width + j];
        }
    }
    let lp = BoundedLp {
        n_rows: width,
        n_cols: n,
        a,
        b: alloc::vec![0.0; width],
        c: y.iter().map(|v| -v).collect(),
        lower: alloc::vec![q - 1.0; n],
        upper: alloc::vec![q; n],
    };
    let sol = simplex::solve(&lp, &SimplexOptions::default())?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::IterationLimit => {
            return Err(Error::Solver("quantile regression hit the iteration limit".into()))
        }
        // A box-constrained dual with the zero point feasible can be neither.
        LpStatus::Infeasible | LpStatus::Unbounded => {
            return Err(Error::Solver("quantile regression dual degenerated".into()))
        }
    }
    let beta: Vec<f64> = sol.duals.iter().map(|p| -p).collect();
    let objective = pinball_sum(rows, width, y, &beta, q);
    Ok(QrModel {
        level: q,
        coefficients: beta,
        objective,
        rank_deficient: sol.rank_deficient,
    })
}

/// Fit directly from a design matrix and its embedded targets.
pub fn fit_design(dm: &DesignMatrix, q: f64) -> Result<QrModel> {
    fit_qr(dm.rows_flat(), dm.width(), dm.targets(), q)
}

/// Predicted conditional quantiles: plain inner products.
pub fn predict_qr(model: &QrModel, rows: &[f64], width: usize) -> Result<Vec<f64>> {
    if width != model.coefficients.len() {
        return Err(Error::DimensionMismatch(alloc::format!(
            "matrix width {width} vs {} coefficients",
            model.coefficients.len()
        )));
    }
    if rows.len() % width != 0 {
        return Err(Error::DimensionMismatch("ragged prediction matrix".into()));
    }
    Ok(rows
        .chunks_exact(width)
        .map(|row| row.iter().zip(&model.coefficients).map(|(a, b)| a * b).sum())
        .collect())
}

/// Predict for every row of a design matrix.
pub fn predict_design(model: &QrModel, dm: &DesignMatrix) -> Result<Vec<f64>> {
    predict_qr(model, dm.rows_flat(), dm.width())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn intercept_only(n: usize) -> Vec<f64> {
        vec![1.0; n]
    }

    #[test]
    fn intercept_only_median_is_empirical_median() {
        let y = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let model = fit_qr(&intercept_only(5), 1, &y, 0.5).unwrap();
        assert!((model.coefficients[0] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn perfect_linear_fit_has_zero_objective() {
        let xs = [0.5, 1.0, 2.0, 3.5, 4.0, 7.25];
        let rows: Vec<f64> = xs.iter().flat_map(|&x| [1.0, x]).collect();
        let y: Vec<f64> = xs.iter().map(|&x| 2.0 * x).collect();
        for q in [0.1, 0.5, 0.9] {
            let model = fit_qr(&rows, 2, &y, q).unwrap();
            assert!(model.objective.abs() < 1e-9, "q={q}: {}", model.objective);
            assert!((model.coefficients[0]).abs() < 1e-7);
            assert!((model.coefficients[1] - 2.0).abs() < 1e-7);
        }
    }

    /// Intercept-only optimum is attained at an order statistic, so
    /// evaluating the objective at every data point is an exact oracle.
    #[test]
    fn intercept_only_matches_grid_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let y: Vec<f64> = (0..20).map(|_| rng.random_range(-100.0..100.0)).collect();
        let x = intercept_only(20);
        for q in [0.1, 0.25, 0.5, 0.75, 0.9] {
            let model = fit_qr(&x, 1, &y, q).unwrap();
            let oracle = y
                .iter()
                .map(|&b| y.iter().map(|&yi| pinball_loss(yi, b, q)).sum::<f64>())
                .fold(f64::INFINITY, f64::min);
            assert!(
                model.objective <= oracle + 1e-6,
                "q={q}: {} vs oracle {}",
                model.objective,
                oracle
            );
        }
    }

    #[test]
    fn objective_never_exceeds_zero_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rows: Vec<f64> = (0..40)
            .flat_map(|_| [1.0, rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
            .collect();
        let y: Vec<f64> = (0..40).map(|_| rng.random_range(-10.0..10.0)).collect();
        for q in [0.05, 0.5, 0.95] {
            let model = fit_qr(&rows, 3, &y, q).unwrap();
            let zero: f64 = y.iter().map(|&yi| pinball_loss(yi, 0.0, q)).sum();
            assert!(model.objective <= zero + 1e-9);
        }
    }

    #[test]
    fn scaling_targets_scales_fit() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rows: Vec<f64> = (0..30)
            .flat_map(|_| [1.0, rng.random_range(0.0..4.0)])
            .collect();
        let y: Vec<f64> = (0..30).map(|_| rng.random_range(-5.0..5.0)).collect();
        let lambda = 3.5;
        let scaled: Vec<f64> = y.iter().map(|v| v * lambda).collect();
        let base = fit_qr(&rows, 2, &y, 0.25).unwrap();
        let big = fit_qr(&rows, 2, &scaled, 0.25).unwrap();
        assert!((big.objective - lambda * base.objective).abs() < 1e-6);
        let preds_base = predict_qr(&base, &rows, 2).unwrap();
        let preds_big = predict_qr(&big, &rows, 2).unwrap();
        for (a, b) in preds_base.iter().zip(&preds_big) {
            assert!((b - lambda * a).abs() < 1e-6);
        }
    }

    #[test]
    fn in_sample_coverage_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 300;
        let width = 4;
        let rows: Vec<f64> = (0..n)
            .flat_map(|_| {
                [
                    1.0,
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                ]
            })
            .collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        for q in [0.1, 0.5, 0.9] {
            let model = fit_qr(&rows, width, &y, q).unwrap();
            let preds = predict_qr(&model, &rows, width).unwrap();
            let below = y
                .iter()
                .zip(&preds)
                .filter(|(yi, p)| **yi - **p < -1e-9)
                .count() as f64
                / n as f64;
            let slack = width as f64 / n as f64;
            assert!(
                below >= q - slack - 1e-9 && below <= q + slack + 1e-9,
                "q={q}, below={below}"
            );
        }
    }

    #[test]
    fn degenerate_equal_targets_short_circuit() {
        let y = vec![4.25; 10];
        let rows: Vec<f64> = (0..10).flat_map(|i| [1.0, i as f64]).collect();
        let model = fit_qr(&rows, 2, &y, 0.9).unwrap();
        assert_eq!(model.coefficients, vec![4.25, 0.0]);
        assert_eq!(model.objective, 0.0);
    }

    #[test]
    fn rank_deficiency_warns_but_solves() {
        // Second feature duplicates the intercept.
        let rows: Vec<f64> = (0..12).flat_map(|i| [1.0, 1.0, i as f64]).collect();
        let y: Vec<f64> = (0..12).map(|i| 3.0 + 0.5 * i as f64 + if i % 2 == 0 { 0.1 } else { -0.1 }).collect();
        let model = fit_qr(&rows, 3, &y, 0.5).unwrap();
        assert!(model.rank_deficient);
        assert!(model.objective.is_finite());
    }

    #[test]
    fn invalid_level_rejected() {
        let err = fit_qr(&intercept_only(3), 1, &[1.0, 2.0, 3.0], 1.0).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }

    #[test]
    fn predict_examples() {
        let zero = QrModel {
            level: 0.5,
            coefficients: vec![0.0, 0.0],
            objective: 0.0,
            rank_deficient: false,
        };
        let rows = vec![1.0, 2.0, 1.0, 3.0];
        assert_eq!(predict_qr(&zero, &rows, 2).unwrap(), vec![0.0, 0.0]);

        let constant = QrModel {
            level: 0.5,
            coefficients: vec![7.5, 0.0],
            objective: 0.0,
            rank_deficient: false,
        };
        assert_eq!(predict_qr(&constant, &rows, 2).unwrap(), vec![7.5, 7.5]);

        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let beta: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
        let model = QrModel {
            level: 0.5,
            coefficients: beta.clone(),
            objective: 0.0,
            rank_deficient: false,
        };
        let rows: Vec<f64> = (0..15).map(|_| rng.random_range(-4.0..4.0)).collect();
        let preds = predict_qr(&model, &rows, 3).unwrap();
        for (i, p) in preds.iter().enumerate() {
            let oracle: f64 = (0..3).map(|j| rows[i * 3 + j] * beta[j]).sum();
            assert!((p - oracle).abs() < 1e-12);
        }

        let err = predict_qr(&model, &rows[..6], 2).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
    }
}
