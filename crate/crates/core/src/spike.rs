//! Extreme price-spike classification and neighbour imputation.
//!
//! A price is a spike when it is an outlier against *both* a long (annual)
//! and a short (monthly) trailing rolling quantile; classified spikes are
//! replaced by the most recent non-spike price before models ever see them.

use alloc::vec::Vec;

use crate::series::PriceSeries;
use crate::time::STEPS_PER_DAY;
use crate::{Error, Result};

/// Rolling-threshold configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SpikeConfig {
    /// Long window, in days.
    pub annual_days: u32,
    /// Short window, in days.
    pub monthly_days: u32,
    /// Upper quantile level for positive spikes.
    pub upper_level: f64,
    /// Lower quantile level for negative spikes.
    pub lower_level: f64,
    /// Compute the rolling thresholds over the progressively imputed series
    /// instead of the raw one.
    pub thresholds_from_imputed: bool,
}

impl Default for SpikeConfig {
    fn default() -> Self {
        SpikeConfig {
            annual_days: 365,
            monthly_days: 30,
            upper_level: 0.975,
            lower_level: 0.025,
            thresholds_from_imputed: false,
        }
    }
}

impl SpikeConfig {
    fn validate(&self) -> Result<()> {
        if !(0.0 < self.lower_level && self.lower_level < self.upper_level && self.upper_level < 1.0)
        {
            return Err(Error::invalid("spike levels must satisfy 0 < lower < upper < 1"));
        }
        if self.monthly_days == 0 || self.monthly_days > self.annual_days {
            return Err(Error::invalid("monthly window must be nonzero and within the annual window"));
        }
        Ok(())
    }
}

/// Per-timestamp spike classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpikeLabel {
    None,
    Positive,
    Negative,
}

impl SpikeLabel {
    pub fn is_spike(self) -> bool {
        !matches!(self, SpikeLabel::None)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SpikeLabel::None => "none",
            SpikeLabel::Positive => "positive",
            SpikeLabel::Negative => "negative",
        }
    }
}

/// Classification labels plus the imputed replacement series.
#[derive(Debug, Clone, PartialEq)]
pub struct SpikeMask {
    pub labels: Vec<SpikeLabel>,
    pub imputed: PriceSeries,
}

/// Fenwick tree over compressed value ranks, supporting order statistics of
/// the current window in logarithmic time.
struct RankTree {
    tree: Vec<u32>,
    total: u32,
}

impl RankTree {
    fn new(n: usize) -> Self {
        RankTree {
            tree: alloc::vec![0u32; n + 1],
            total: 0,
        }
    }

    fn update(&mut self, idx: usize, delta: i32) {
        let mut i = idx + 1;
        while i < self.tree.len() {
            self.tree[i] = (self.tree[i] as i64 + delta as i64) as u32;
            i += i & i.wrapping_neg();
        }
        self.total = (self.total as i64 + delta as i64) as u32;
    }

    /// Index of the 0-based `rank`-th smallest element.
    fn select(&self, rank: u32) -> usize {
        let mut pos = 0usize;
        let mut remaining = rank + 1;
        let mut bit = self.tree.len().next_power_of_two() >> 1;
        while bit > 0 {
            let next = pos + bit;
            if next < self.tree.len() && self.tree[next] < remaining {
                remaining -= self.tree[next];
                pos = next;
            }
            bit >>= 1;
        }
        pos // 0-based compressed index
    }
}

/// Multi-level rolling quantile over a sliding window of `window` steps.
struct RollingQuantile<'a> {
    values: &'a [f64],
    sorted_unique: Vec<f64>,
    tree: RankTree,
    window: usize,
}

impl<'a> RollingQuantile<'a> {
    fn new(values: &'a [f64], window: usize) -> Self {
        let mut sorted_unique: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
        sorted_unique.sort_by(f64::total_cmp);
        sorted_unique.dedup();
        let tree = RankTree::new(sorted_unique.len());
        RollingQuantile {
            values,
            sorted_unique,
            tree,
            window,
        }
    }

    fn rank_of(&self, v: f64) -> usize {
        self.sorted_unique
            .binary_search_by(|probe| probe.total_cmp(&v))
            .expect("value was indexed during compression")
    }

    fn insert_value(&mut self, v: f64) {
        if v.is_finite() {
            let r = self.rank_of(v);
            self.tree.update(r, 1);
        }
    }

    /// Advance so the window covers `[t - window, t)`; call with increasing `t`.
    fn advance_to(&mut self, t: usize) {
        // Caller guarantees monotone t starting from `window`.
        if t >= 1 {
            self.insert_value(self.values[t - 1]);
        }
        if t >= self.window + 1 {
            let old = self.values[t - self.window - 1];
            if old.is_finite() {
                let r = self.rank_of(old);
                self.tree.update(r, -1);
            }
        }
    }

    /// For variants that track a transformed series (e.g. imputed values).
    fn advance_with(&mut self, t: usize, newest: f64, oldest: f64) {
        if t >= 1 {
            self.insert_value(newest);
        }
        if t >= self.window + 1 && oldest.is_finite() {
            let r = self.rank_of(oldest);
            self.tree.update(r, -1);
        }
    }

    /// Type-7 interpolated quantile of the current window contents.
    fn quantile(&self, level: f64) -> Option<f64> {
        let cnt = self.tree.total;
        if cnt == 0 {
            return None;
        }
        if cnt == 1 {
            return Some(self.sorted_unique[self.tree.select(0)]);
        }
        let h = (cnt - 1) as f64 * level;
        let lo = h as u32;
        let frac = h - lo as f64;
        let v_lo = self.sorted_unique[self.tree.select(lo)];
        if frac == 0.0 || lo + 1 > cnt - 1 {
            Some(v_lo)
        } else {
            let v_hi = self.sorted_unique[self.tree.select(lo + 1)];
            Some(v_lo + frac * (v_hi - v_lo))
        }
    }
}

/// Rolling empirical quantile of the trailing `window` observations.
///
/// Entry `t` is the type-7 quantile of `values[t-window .. t]` (strictly
/// trailing, the current observation excluded); `None` until the window is
/// fully populated. `NaN` entries are skipped.
pub fn rolling_quantile(values: &[f64], window: usize, level: f64) -> Result<Vec<Option<f64>>> {
    if window == 0 {
        return Err(Error::invalid("window must be positive"));
    }
    if !(0.0 < level && level < 1.0) {
        return Err(Error::invalid("quantile level must lie in (0, 1)"));
    }
    let mut engine = RollingQuantile::new(values, window);
    let mut out = Vec::with_capacity(values.len());
    for t in 0..values.len() {
        engine.advance_to(t);
        if t < window {
            out.push(None);
        } else {
            out.push(engine.quantile(level));
        }
    }
    Ok(out)
}

fn spike_rule(
    y: f64,
    annual_upper: f64,
    monthly_upper: f64,
    annual_lower: f64,
    monthly_lower: f64,
) -> SpikeLabel {
    if y > 0.0 && y > annual_upper + monthly_upper {
        SpikeLabel::Positive
    } else if y < 0.0 && y < (annual_lower + monthly_lower) / 2.0 {
        SpikeLabel::Negative
    } else {
        SpikeLabel::None
    }
}

/// Classify spikes with the dual rolling-quantile rule.
///
/// A positive spike needs `y > 0` and `y` above the *sum* of the annual and
/// monthly upper quantiles; a negative spike needs `y < 0` and `y` below the
/// *average* of the two lower quantiles. Until a full annual window of
/// history exists the label is `None`.
pub fn classify_spikes(raw: &PriceSeries, cfg: &SpikeConfig) -> Result<Vec<SpikeLabel>> {
    Ok(filter_series(raw, cfg)?.labels)
}

/// Replace classified spikes by the most recent preceding non-spike price;
/// leading spikes are backfilled from the earliest following non-spike.
pub fn impute_neighbor(raw: &PriceSeries, labels: &[SpikeLabel]) -> Result<PriceSeries> {
    if labels.len() != raw.len() {
        return Err(Error::DimensionMismatch(alloc::format!(
            "{} labels for {} prices",
            labels.len(),
            raw.len()
        )));
    }
    let values = raw.values();
    let mut imputed = Vec::with_capacity(values.len());
    let mut last_good: Option<f64> = None;
    for (&v, &label) in values.iter().zip(labels) {
        if label.is_spike() {
            // NaN marks a leading spike with no prior non-spike; backfilled below.
            imputed.push(last_good.unwrap_or(f64::NAN));
        } else {
            if v.is_finite() {
                last_good = Some(v);
            }
            imputed.push(v);
        }
    }
    let first_good = values
        .iter()
        .zip(labels)
        .find(|(v, l)| !l.is_spike() && v.is_finite())
        .map(|(v, _)| *v);
    match first_good {
        Some(g) => {
            for (slot, label) in imputed.iter_mut().zip(labels) {
                if label.is_spike() && slot.is_nan() {
                    *slot = g;
                }
            }
        }
        None => {
            if labels.iter().any(|l| l.is_spike()) {
                return Err(Error::invalid(
                    "every observation is classified as a spike; nothing to impute from",
                ));
            }
        }
    }
    raw.with_values(imputed)
}

/// Classify and impute in one pass.
///
/// With `thresholds_from_imputed` set, the rolling windows track the
/// progressively imputed series rather than the raw one.
pub fn filter_series(raw: &PriceSeries, cfg: &SpikeConfig) -> Result<SpikeMask> {
    cfg.validate()?;
    let values = raw.values();
    let n = values.len();
    let annual = cfg.annual_days as usize * STEPS_PER_DAY;
    let monthly = cfg.monthly_days as usize * STEPS_PER_DAY;

    let mut annual_win = RollingQuantile::new(values, annual);
    let mut monthly_win = RollingQuantile::new(values, monthly);
    let mut labels = Vec::with_capacity(n);
    // Tracked series feeding the windows: raw, or imputed-so-far.
    let mut tracked: Vec<f64> = Vec::with_capacity(n);
    let mut last_good: Option<f64> = None;

    for t in 0..n {
        if cfg.thresholds_from_imputed {
            let newest = if t >= 1 { tracked[t - 1] } else { f64::NAN };
            let oldest_a = if t >= annual + 1 {
                tracked[t - annual - 1]
            } else {
                f64::NAN
            };
            let oldest_m = if t >= monthly + 1 {
                tracked[t - monthly - 1]
            } else {
                f64::NAN
            };
            annual_win.advance_with(t, newest, oldest_a);
            monthly_win.advance_with(t, newest, oldest_m);
        } else {
            annual_win.advance_to(t);
            monthly_win.advance_to(t);
        }

        let y = values[t];
        let label = if t < annual || !y.is_finite() {
            SpikeLabel::None
        } else {
            match (
                annual_win.quantile(cfg.upper_level),
                monthly_win.quantile(cfg.upper_level),
                annual_win.quantile(cfg.lower_level),
                monthly_win.quantile(cfg.lower_level),
            ) {
                (Some(au), Some(mu), Some(al), Some(ml)) => spike_rule(y, au, mu, al, ml),
                _ => SpikeLabel::None,
            }
        };
        labels.push(label);
        if label.is_spike() {
            tracked.push(last_good.unwrap_or(f64::NAN));
        } else {
            if y.is_finite() {
                last_good = Some(y);
            }
            tracked.push(y);
        }
    }

    let imputed = impute_neighbor(raw, &labels)?;
    Ok(SpikeMask { labels, imputed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantile::type7;
    use crate::time::Timestamp;
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn series(values: Vec<f64>) -> PriceSeries {
        PriceSeries::new("SA", Timestamp::from_date(2018, 1, 1), values).unwrap()
    }

    #[test]
    fn rolling_quantile_symmetric_midpoint() {
        let mut values: Vec<f64> = (1..=100).map(f64::from).collect();
        values.push(0.0); // quantile at t=100 sees exactly 1..=100
        let q = rolling_quantile(&values, 100, 0.5).unwrap();
        assert_eq!(q[99], None);
        assert_eq!(q[100], Some(50.5));
    }

    #[test]
    fn rolling_quantile_constant_window() {
        let values = vec![3.25; 40];
        for level in [0.025, 0.5, 0.975] {
            let q = rolling_quantile(&values, 10, level).unwrap();
            assert_eq!(q[10], Some(3.25));
            assert_eq!(q[39], Some(3.25));
        }
    }

    #[test]
    fn rolling_quantile_matches_full_sort_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let values: Vec<f64> = (0..1100).map(|_| rng.random_range(-50.0..500.0)).collect();
        let window = 1000;
        let q = rolling_quantile(&values, window, 0.975).unwrap();
        for t in [window, window + 37, values.len() - 1] {
            let oracle = type7(&values[t - window..t], 0.975);
            let got = q[t].unwrap();
            assert!(
                (got - oracle).abs() <= 1e-9 * oracle.abs().max(1.0),
                "t={t}: {got} vs {oracle}"
            );
        }
    }

    #[test]
    fn rule_examples() {
        assert_eq!(spike_rule(50.0, 100.0, 40.0, -50.0, -70.0), SpikeLabel::None);
        assert_eq!(
            spike_rule(150.0, 100.0, 40.0, -50.0, -70.0),
            SpikeLabel::Positive
        );
        assert_eq!(
            spike_rule(-80.0, 100.0, 40.0, -50.0, -70.0),
            SpikeLabel::Negative
        );
    }

    #[test]
    fn monotone_thresholding() {
        // Raising y above the summed upper thresholds always flips positive.
        for y in [140.0, 140.1, 1_000.0] {
            let label = spike_rule(y, 100.0, 40.0, -50.0, -70.0);
            if y > 140.0 {
                assert_eq!(label, SpikeLabel::Positive);
            } else {
                assert_eq!(label, SpikeLabel::None);
            }
        }
    }

    #[test]
    fn impute_examples() {
        let s = series(vec![10.0, 999.0, 30.0]);
        let labels = vec![SpikeLabel::None, SpikeLabel::Positive, SpikeLabel::None];
        assert_eq!(
            impute_neighbor(&s, &labels).unwrap().values(),
            &[10.0, 10.0, 30.0]
        );

        let s = series(vec![10.0, 999.0, 999.0, 40.0]);
        let labels = vec![
            SpikeLabel::None,
            SpikeLabel::Positive,
            SpikeLabel::Positive,
            SpikeLabel::None,
        ];
        assert_eq!(
            impute_neighbor(&s, &labels).unwrap().values(),
            &[10.0, 10.0, 10.0, 40.0]
        );

        let s = series(vec![999.0, 7.0, 9.0]);
        let labels = vec![SpikeLabel::Positive, SpikeLabel::None, SpikeLabel::None];
        assert_eq!(
            impute_neighbor(&s, &labels).unwrap().values(),
            &[7.0, 7.0, 9.0]
        );
    }

    /// Mild baseline with planted extremes well beyond any achievable
    /// threshold; every plant must be recalled and imputation must restore a
    /// spike-free series under the same thresholds.
    #[test]
    fn planted_spike_recall_and_idempotence() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let days = 3u32;
        let n = (370 + days as usize) * STEPS_PER_DAY;
        let mut values: Vec<f64> = (0..n).map(|_| rng.random_range(20.0..60.0)).collect();
        let warm = 365 * STEPS_PER_DAY;
        let plants: Vec<usize> = (0..40).map(|k| warm + 13 + k * 31).collect();
        for &p in &plants {
            values[p] = 100_000.0;
        }
        let cfg = SpikeConfig {
            annual_days: 365,
            monthly_days: 30,
            ..SpikeConfig::default()
        };
        let mask = filter_series(&series(values.clone()), &cfg).unwrap();
        for &p in &plants {
            assert_eq!(mask.labels[p], SpikeLabel::Positive, "plant at {p} missed");
        }
        // recall over plants is exactly 1.0; no false positives elsewhere
        let spikes: Vec<usize> = mask
            .labels
            .iter()
            .enumerate()
            .filter(|(_, l)| l.is_spike())
            .map(|(i, _)| i)
            .collect();
        assert_eq!(spikes, plants);
        // imputed[t] == raw[t] wherever the label is none
        for (t, l) in mask.labels.iter().enumerate() {
            if !l.is_spike() {
                assert_eq!(mask.imputed.values()[t], values[t]);
            }
        }
        // classify the imputed series: no spikes remain
        let again = filter_series(&mask.imputed, &cfg).unwrap();
        assert!(again.labels.iter().all(|l| !l.is_spike()));
    }
}
