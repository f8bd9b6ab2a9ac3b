//! Rolling-window plans for daily retraining.

use alloc::vec::Vec;
use core::ops::Range;

use crate::time::{Timestamp, STEPS_PER_DAY};
use crate::{Error, Result};

/// Trailing window lengths for one daily retrain/forecast cycle.
///
/// All windows are trailing and exclude the test day itself; shifting to the
/// next test day advances every window by exactly one day.
#[derive(Debug, Clone, PartialEq)]
pub struct RollingWindowPlan {
    /// First day to forecast (midnight).
    pub first_test_day: Timestamp,
    /// Number of consecutive test days.
    pub n_test_days: usize,
    /// Spike-statistics window (days), nominally one year.
    pub spike_days: u32,
    /// Constituent training lengths (days), e.g. short/medium/long.
    pub constituent_days: Vec<u32>,
    /// Ensemble (and post-processing) training window (days).
    pub ensemble_days: u32,
}

impl RollingWindowPlan {
    /// Days of history needed before the first test day.
    pub fn warmup_days(&self) -> u32 {
        let max_constituent = self.constituent_days.iter().copied().max().unwrap_or(0);
        // Lag features reach back 7 days; the spike window covers that in any
        // realistic configuration, but keep the plan honest for tiny setups.
        self.spike_days.max(7) + max_constituent + self.ensemble_days
    }
}

/// Index ranges (into the price grid) backing one test day.
#[derive(Debug, Clone, PartialEq)]
pub struct DayWindows {
    /// Midnight of the day being forecast.
    pub test_day: Timestamp,
    /// Rows feeding the trailing spike statistics.
    pub spike_stats: Range<usize>,
    /// Training rows per constituent window length, ordered as in the plan.
    pub constituent: Vec<(u32, Range<usize>)>,
    /// Rows available to fit the ensemble / post-processing models.
    pub ensemble: Range<usize>,
    /// The 288 rows being forecast.
    pub test_rows: Range<usize>,
}

/// Lay out the window views for every test day in the plan.
///
/// The extent is described by the grid origin and its length in steps. The
/// result is a pure function of `(plan, extent)`.
pub fn rolling_windows(
    plan: &RollingWindowPlan,
    extent_start: Timestamp,
    extent_len: usize,
) -> Result<Vec<DayWindows>> {
    if plan.first_test_day != plan.first_test_day.day_start() {
        return Err(Error::invalid("first test day must be a midnight"));
    }
    if plan.n_test_days == 0 {
        return Err(Error::invalid("plan has no test days"));
    }
    let warmup_steps = plan.warmup_days() as i64 * STEPS_PER_DAY as i64;
    let earliest = {
        // First midnight with a full warmup behind it.
        let first_full = if extent_start == extent_start.day_start() {
            extent_start
        } else {
            extent_start.day_start().add_days(1)
        };
        first_full.add_days(plan.warmup_days() as i64)
    };
    if plan.first_test_day < earliest {
        return Err(Error::ExtentTooShort(earliest));
    }
    let last_day = plan.first_test_day.add_days(plan.n_test_days as i64 - 1);
    let end_steps = last_day.steps_since(extent_start) + STEPS_PER_DAY as i64;
    if end_steps > extent_len as i64 {
        return Err(Error::invalid(alloc::format!(
            "extent ends before test day {last_day}: need {end_steps} steps, have {extent_len}"
        )));
    }

    let mut out = Vec::with_capacity(plan.n_test_days);
    for d in 0..plan.n_test_days {
        let day = plan.first_test_day.add_days(d as i64);
        let idx = day.steps_since(extent_start) as usize;
        debug_assert!(idx as i64 >= warmup_steps);
        let back = |days: u32| idx - days as usize * STEPS_PER_DAY;
        out.push(DayWindows {
            test_day: day,
            spike_stats: back(plan.spike_days)..idx,
            constituent: plan
                .constituent_days
                .iter()
                .map(|&l| (l, back(l)..idx))
                .collect(),
            ensemble: back(plan.ensemble_days)..idx,
            test_rows: idx..idx + STEPS_PER_DAY,
        });
    }
    Ok(out)
}
