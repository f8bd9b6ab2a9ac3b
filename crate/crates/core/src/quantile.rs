//! Empirical quantile helpers and the per-timestamp quantile surface type.

use alloc::vec::Vec;

use crate::time::Timestamp;
use crate::{Error, Result};

/// The nine key quantile levels forecast throughout.
pub const NINE_LEVELS: [f64; 9] = [0.025, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.975];

/// Linear-interpolated empirical quantile of sorted data (type-7 convention).
///
/// `sorted` must be ascending and non-empty.
pub fn type7_sorted(sorted: &[f64], level: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * level;
    let lo = h as usize; // level in (0,1) keeps h in [0, n-1)
    let frac = h - lo as f64;
    if frac == 0.0 || lo + 1 >= n {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

/// Type-7 quantile of unsorted data (copies and sorts).
pub fn type7(values: &[f64], level: f64) -> f64 {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(f64::total_cmp);
    type7_sorted(&v, level)
}

/// Smallest element `y` of ascending `sorted` with `level <= cdf(y)` where the
/// CDF places equal mass on each element (type-1 / inverse-CDF convention).
pub fn type1_sorted(sorted: &[f64], level: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let n = sorted.len();
    let rank = libm::ceil(level * n as f64) as usize;
    sorted[rank.clamp(1, n) - 1]
}

/// Sort a per-timestamp vector of predicted quantiles in place (rearrangement),
/// removing any crossings. Sorting never increases the pinball loss at any
/// level.
pub fn rearrange(values: &mut [f64]) {
    values.sort_by(f64::total_cmp);
}

/// Per-timestamp vectors of predicted values at fixed quantile levels.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileSurface {
    levels: Vec<f64>,
    timestamps: Vec<Timestamp>,
    /// Row-major `n x levels.len()`.
    values: Vec<f64>,
}

impl QuantileSurface {
    pub fn new(levels: Vec<f64>, timestamps: Vec<Timestamp>, values: Vec<f64>) -> Result<Self> {
        if levels.is_empty() || values.len() != timestamps.len() * levels.len() {
            return Err(Error::DimensionMismatch(alloc::format!(
                "{} values for {} timestamps x {} levels",
                values.len(),
                timestamps.len(),
                levels.len()
            )));
        }
        if levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("quantile levels must be strictly increasing"));
        }
        Ok(QuantileSurface {
            levels,
            timestamps,
            values,
        })
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn timestamps(&self) -> &[Timestamp] {
        &self.timestamps
    }

    pub fn n_rows(&self) -> usize {
        self.timestamps.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.levels.len();
        &self.values[i * w..(i + 1) * w]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        let w = self.levels.len();
        &mut self.values[i * w..(i + 1) * w]
    }

    /// Copy of one level's series.
    pub fn level_series(&self, level_idx: usize) -> Vec<f64> {
        let w = self.levels.len();
        self.values[level_idx..]
            .iter()
            .step_by(w)
            .copied()
            .collect()
    }

    /// Index of a level, by exact value.
    pub fn level_index(&self, level: f64) -> Option<usize> {
        self.levels.iter().position(|l| *l == level)
    }

    /// Sort each row in place, removing quantile crossings.
    pub fn rearrange_rows(&mut self) {
        let w = self.levels.len();
        for row in self.values.chunks_exact_mut(w) {
            rearrange(row);
        }
    }

    /// Replace one level's series; lengths must match.
    pub fn set_level_series(&mut self, level_idx: usize, series: &[f64]) -> Result<()> {
        if series.len() != self.n_rows() || level_idx >= self.levels.len() {
            return Err(Error::DimensionMismatch("level series shape".into()));
        }
        let w = self.levels.len();
        for (i, v) in series.iter().enumerate() {
            self.values[i * w + level_idx] = *v;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn symmetric_midpoint() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(type7(&v, 0.5), 50.5);
    }

    #[test]
    fn degenerate_constant() {
        let v = vec![7.0; 32];
        for level in NINE_LEVELS {
            assert_eq!(type7(&v, level), 7.0);
        }
    }

    #[test]
    fn type1_reads_step_function() {
        let v = vec![1.0, 2.0, 3.0, 4.0];
        assert_eq!(type1_sorted(&v, 0.5), 2.0);
        assert_eq!(type1_sorted(&v, 0.75), 3.0);
        assert_eq!(type1_sorted(&v, 0.7501), 4.0);
    }
}
