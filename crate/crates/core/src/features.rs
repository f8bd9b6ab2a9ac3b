//! Design-matrix construction: lagged prices, calendar encodings, weather,
//! and the nonlinear augmentations used by the linear models.

use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Range;

use crate::series::{PriceSeries, WeatherSeries};
use crate::time::{Timestamp, STEPS_PER_DAY};
use crate::{Error, Result};

/// 24-hour price lag, in grid steps.
pub const LAG_DAY: usize = 288;
/// 7-day price lag, in grid steps.
pub const LAG_WEEK: usize = 2016;

/// Feature toggles. The lag/calendar block is always present.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureConfig {
    /// Include per-station weather columns plus squared temperature and wind.
    pub weather: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig { weather: true }
    }
}

/// Whether rows are built to train on or to predict from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowPurpose {
    /// Rows must carry an observed target; incomplete rows are dropped.
    Training,
    /// Targets may be unobserved (`NaN`); rows still need complete features.
    Prediction,
}

/// Feature rows aligned to target timestamps.
///
/// Row `t` references only inputs observable 24 hours before `t`: the price
/// lags are `y[t-288]` and `y[t-2016]`, and calendar columns derive from the
/// timestamp alone. Weather inputs are day-ahead forecast values valid at `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    col_names: Vec<String>,
    width: usize,
    rows: Vec<f64>,
    targets: Vec<f64>,
    timestamps: Vec<Timestamp>,
}

impl DesignMatrix {
    pub fn n_rows(&self) -> usize {
        self.timestamps.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.width..(i + 1) * self.width]
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn timestamps(&self) -> &[Timestamp] {
        &self.timestamps
    }

    pub fn col_names(&self) -> &[String] {
        &self.col_names
    }

    pub fn rows_flat(&self) -> &[f64] {
        &self.rows
    }
}

fn column_names(weather: Option<&WeatherSeries>, cfg: &FeatureConfig) -> Vec<String> {
    let mut names: Vec<String> = Vec::new();
    names.push("intercept".into());
    names.push("lag_288".into());
    names.push("lag_2016".into());
    for dow in ["mon", "tue", "wed", "thu", "fri", "sat", "sun"] {
        names.push(alloc::format!("dow_{dow}"));
    }
    names.push("tod_idx".into());
    for p in 2..=6 {
        names.push(alloc::format!("tod_idx_p{p}"));
    }
    if cfg.weather {
        if let Some(w) = weather {
            for st in w.stations() {
                names.push(alloc::format!("{}_wind", st.name));
                names.push(alloc::format!("{}_temp", st.name));
                names.push(alloc::format!("{}_humidity", st.name));
                names.push(alloc::format!("{}_cloud", st.name));
            }
            for st in w.stations() {
                names.push(alloc::format!("{}_temp_sq", st.name));
                names.push(alloc::format!("{}_wind_sq", st.name));
            }
        }
    }
    names
}

/// Build feature rows for the grid indices in `target_range`.
///
/// `prices` is the series lags and targets are read from (normally the
/// spike-imputed series). The range may extend up to one day past the end of
/// the series to build prediction rows whose targets are not yet observed.
pub fn build_design_matrix(
    prices: &PriceSeries,
    weather: Option<&WeatherSeries>,
    target_range: Range<usize>,
    cfg: &FeatureConfig,
    purpose: RowPurpose,
) -> Result<DesignMatrix> {
    if target_range.start < LAG_WEEK {
        return Err(Error::InsufficientHistory {
            required: LAG_WEEK,
            available: target_range.start,
        });
    }
    if target_range.end > prices.len() + STEPS_PER_DAY {
        return Err(Error::invalid(alloc::format!(
            "target range ends {} steps past the series",
            target_range.end - prices.len()
        )));
    }
    let use_weather = cfg.weather && weather.is_some();
    if use_weather {
        let w = weather.unwrap();
        if w.start() != prices.start() || w.len() < target_range.end {
            return Err(Error::TimestampMismatch(
                prices.start().add_steps(target_range.end as i64 - 1),
            ));
        }
    }

    let col_names = column_names(weather.filter(|_| use_weather), cfg);
    let width = col_names.len();
    let values = prices.values();
    let n_rows_max = target_range.len();
    let mut rows = Vec::with_capacity(n_rows_max * width);
    let mut targets = Vec::with_capacity(n_rows_max);
    let mut timestamps = Vec::with_capacity(n_rows_max);
    let mut row_buf = Vec::with_capacity(width);

    for t in target_range {
        let ts = prices.timestamp_at(t);
        let target = if t < values.len() {
            values[t]
        } else {
            f64::NAN
        };
        row_buf.clear();
        row_buf.push(1.0);
        row_buf.push(values[t - LAG_DAY]);
        row_buf.push(values[t - LAG_WEEK]);
        let dow = ts.day_of_week();
        for d in 0..7 {
            row_buf.push(if d == dow { 1.0 } else { 0.0 });
        }
        let idx = ts.interval_index() as f64;
        let mut power = idx;
        row_buf.push(power);
        for _ in 2..=6 {
            power *= idx;
            row_buf.push(power);
        }
        if use_weather {
            let w = weather.unwrap();
            for st in w.stations() {
                row_buf.push(st.wind_kmh[t]);
                row_buf.push(st.temp_c[t]);
                row_buf.push(st.humidity_pct[t]);
                row_buf.push(st.cloud_pct[t]);
            }
            for st in w.stations() {
                row_buf.push(st.temp_c[t] * st.temp_c[t]);
                row_buf.push(st.wind_kmh[t] * st.wind_kmh[t]);
            }
        }

        let features_complete = row_buf.iter().all(|v| v.is_finite());
        let keep = match purpose {
            RowPurpose::Training => features_complete && target.is_finite(),
            RowPurpose::Prediction => features_complete,
        };
        if keep {
            rows.extend_from_slice(&row_buf);
            targets.push(target);
            timestamps.push(ts);
        }
    }

    Ok(DesignMatrix {
        col_names,
        width,
        rows,
        targets,
        timestamps,
    })
}
