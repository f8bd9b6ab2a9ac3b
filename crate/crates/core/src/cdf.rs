//! Predictive CDF built from the nine key quantiles.
//!
//! Construction: piecewise-linear interpolation between the nine
//! (level, value) points; below the 0.025 value the CDF is 0 and at the 0.975
//! value it jumps to 1 (bounded support). The construction is isolated here
//! so an alternative could be swapped in one place; report writers quote
//! [`PredictiveCdf::CONSTRUCTION`] in their headers.

use alloc::vec::Vec;

use crate::quantile::NINE_LEVELS;
use crate::{Error, Result};

/// A predictive distribution at one timestamp, summarised by the nine key
/// quantiles with a declared interpolation rule.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictiveCdf {
    values: Vec<f64>,
}

impl PredictiveCdf {
    /// One-line description of the interpolation rule, for report headers.
    pub const CONSTRUCTION: &'static str =
        "piecewise-linear between the nine quantiles; bounded support (F=0 below the 0.025 value, F=1 at the 0.975 value)";

    /// Build from values at the nine fixed levels; values must be
    /// nondecreasing (pre-sort crossing predictions before calling).
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() != NINE_LEVELS.len() {
            return Err(Error::DimensionMismatch(alloc::format!(
                "{} quantile values, expected {}",
                values.len(),
                NINE_LEVELS.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("quantile values must be finite"));
        }
        for i in 1..values.len() {
            if values[i] < values[i - 1] {
                return Err(Error::QuantileCrossing {
                    lower_level: NINE_LEVELS[i - 1],
                    lower: values[i - 1],
                    upper_level: NINE_LEVELS[i],
                    upper: values[i],
                });
            }
        }
        Ok(PredictiveCdf { values })
    }

    pub fn levels(&self) -> &'static [f64] {
        &NINE_LEVELS
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// F(u).
    pub fn cdf(&self, u: f64) -> f64 {
        let v = &self.values;
        let q = &NINE_LEVELS;
        if u < v[0] {
            return 0.0;
        }
        if u >= v[8] {
            return 1.0;
        }
        // u in [v0, v8): find the segment.
        let mut i = 0;
        while i < 8 && u >= v[i + 1] {
            i += 1;
        }
        if v[i + 1] == v[i] {
            q[i + 1]
        } else {
            q[i] + (q[i + 1] - q[i]) * (u - v[i]) / (v[i + 1] - v[i])
        }
    }

    /// Quantile function (inverse CDF); levels outside `[0.025, 0.975]` clamp
    /// to the outer quantile values (bounded support).
    pub fn quantile(&self, p: f64) -> f64 {
        let v = &self.values;
        let q = &NINE_LEVELS;
        if p <= q[0] {
            return v[0];
        }
        if p >= q[8] {
            return v[8];
        }
        let mut i = 0;
        while i < 8 && p > q[i + 1] {
            i += 1;
        }
        v[i] + (v[i + 1] - v[i]) * (p - q[i]) / (q[i + 1] - q[i])
    }

    /// Continuous ranked probability score against an observation, in closed
    /// form over the piecewise representation.
    pub fn crps(&self, y: f64) -> f64 {
        let v = &self.values;
        let q = &NINE_LEVELS;
        let mut total = 0.0;
        // Below the support: F = 0, integrand is 1 on [y, v0).
        if y < v[0] {
            total += v[0] - y;
        }
        // Above the support: F = 1, integrand is 1 on (v8, y].
        if y > v[8] {
            total += y - v[8];
        }
        // Interior segments with linear F.
        for i in 0..8 {
            let (a, b) = (v[i], v[i + 1]);
            if a == b {
                continue;
            }
            let (fa, fb) = (q[i], q[i + 1]);
            let line = |u: f64| fa + (fb - fa) * (u - a) / (b - a);
            // Integral of (F(u) - c)^2 over [lo, hi] for constant indicator c.
            let piece = |lo: f64, hi: f64, c: f64| -> f64 {
                if hi <= lo {
                    return 0.0;
                }
                let ga = line(lo) - c;
                let gb = line(hi) - c;
                (hi - lo) * (ga * ga + ga * gb + gb * gb) / 3.0
            };
            if y <= a {
                total += piece(a, b, 1.0);
            } else if y >= b {
                total += piece(a, b, 0.0);
            } else {
                total += piece(a, y, 0.0) + piece(y, b, 1.0);
            }
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spread() -> PredictiveCdf {
        PredictiveCdf::new(vec![-20.0, -10.0, 0.0, 10.0, 25.0, 40.0, 60.0, 80.0, 120.0]).unwrap()
    }

    #[test]
    fn cdf_and_quantile_are_inverse_on_the_interior() {
        let cdf = spread();
        for p in [0.05, 0.1, 0.3, 0.5, 0.77, 0.9, 0.95] {
            let v = cdf.quantile(p);
            assert!((cdf.cdf(v) - p).abs() < 1e-12, "p={p}");
        }
        assert_eq!(cdf.quantile(0.01), -20.0);
        assert_eq!(cdf.quantile(0.99), 120.0);
        assert_eq!(cdf.cdf(-30.0), 0.0);
        assert_eq!(cdf.cdf(120.0), 1.0);
        assert_eq!(cdf.cdf(200.0), 1.0);
    }

    #[test]
    fn crossing_rejected() {
        let err =
            PredictiveCdf::new(vec![0.0, 1.0, 0.5, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]).unwrap_err();
        assert!(matches!(err, Error::QuantileCrossing { .. }));
    }

    #[test]
    fn point_mass_crps_is_absolute_error() {
        let cdf = PredictiveCdf::new(vec![7.0; 9]).unwrap();
        assert_eq!(cdf.crps(7.0), 0.0);
        assert!((cdf.crps(10.5) - 3.5).abs() < 1e-12);
        assert!((cdf.crps(-1.0) - 8.0).abs() < 1e-12);
    }

    /// Trapezoid quadrature between knots (independent of the closed form).
    fn crps_numeric(cdf: &PredictiveCdf, y: f64) -> f64 {
        let v = cdf.values();
        let mut knots: Vec<f64> = v.to_vec();
        knots.push(y);
        knots.sort_by(f64::total_cmp);
        let mut total = 0.0;
        // Outside-support parts are exact rectangles.
        if y < v[0] {
            total += v[0] - y;
        }
        if y > v[8] {
            total += y - v[8];
        }
        for w in knots.windows(2) {
            let (a, b) = (w[0].max(v[0]), w[1].min(v[8]));
            if b <= a {
                continue;
            }
            // The indicator is constant strictly inside each knot interval.
            let ind = if 0.5 * (a + b) >= y { 1.0 } else { 0.0 };
            let steps = 20_000;
            let h = (b - a) / steps as f64;
            let f = |u: f64| {
                let d = cdf.cdf(u) - ind;
                d * d
            };
            let mut acc = 0.5 * (f(a) + f(b));
            for s in 1..steps {
                acc += f(a + h * s as f64);
            }
            total += acc * h;
        }
        total
    }

    #[test]
    fn closed_form_matches_numeric_integration() {
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        for case in 0..50 {
            let mut vals: Vec<f64> = (0..9).map(|_| rng.random_range(-50.0..200.0)).collect();
            vals.sort_by(f64::total_cmp);
            let cdf = PredictiveCdf::new(vals.clone()).unwrap();
            let y = rng.random_range(-80.0..250.0);
            let exact = cdf.crps(y);
            let numeric = crps_numeric(&cdf, y);
            let rel = (exact - numeric).abs() / numeric.abs().max(1e-12);
            assert!(rel <= 1e-6, "case {case}: {exact} vs {numeric} (rel {rel})");
            assert!(exact >= 0.0);
        }
    }

    #[test]
    fn matching_quantiles_give_zero_under_step_construction() {
        let cdf = PredictiveCdf::new(vec![5.0; 9]).unwrap();
        assert_eq!(cdf.crps(5.0), 0.0);
    }
}
