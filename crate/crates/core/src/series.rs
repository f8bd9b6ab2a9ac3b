//! Gridded price and weather series.

use alloc::string::String;
use alloc::vec::Vec;

use crate::time::{Timestamp, STEP_SECS};
use crate::{Error, Result};

/// Regulatory market floor price (AUD/MWh).
pub const MARKET_FLOOR: f64 = -1000.0;
/// Regulatory market price cap (AUD/MWh).
pub const MARKET_CAP: f64 = 15_100.0;

/// A non-fatal observation recorded while assembling a series.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadWarning {
    pub at: Timestamp,
    pub message: String,
}

/// Uniformly gridded 5-minute spot prices.
///
/// Missing observations are explicit `NaN` entries so that indices and
/// timestamps stay in lockstep; they are never silently skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    start: Timestamp,
    values: Vec<f64>,
    region: String,
}

impl PriceSeries {
    /// Build a series from an already contiguous value vector.
    pub fn new(region: impl Into<String>, start: Timestamp, values: Vec<f64>) -> Result<Self> {
        if !start.is_aligned() {
            return Err(Error::MisalignedTimestamp(start, STEP_SECS));
        }
        Ok(PriceSeries {
            start,
            values,
            region: region.into(),
        })
    }

    /// Assemble a grid-validated series from raw `(timestamp, price)` rows.
    ///
    /// Rows are sorted; duplicate timestamps are rejected; gaps of at most
    /// `max_gap_steps` missing intervals are filled with `NaN` sentinels.
    /// Prices outside the regulatory floor/cap produce warnings but are kept.
    pub fn from_observations(
        region: impl Into<String>,
        mut rows: Vec<(Timestamp, f64)>,
        max_gap_steps: usize,
    ) -> Result<(Self, Vec<LoadWarning>)> {
        if rows.is_empty() {
            return Err(Error::invalid("no observations supplied"));
        }
        rows.sort_by_key(|(t, _)| *t);
        for (t, _) in &rows {
            if !t.is_aligned() {
                return Err(Error::MisalignedTimestamp(*t, STEP_SECS));
            }
        }
        let start = rows[0].0;
        let mut values = Vec::with_capacity(rows.len());
        let mut warnings = Vec::new();
        let mut expected = start;
        for (t, price) in rows {
            if t == expected {
                // next grid slot
            } else if t < expected {
                return Err(Error::DuplicateTimestamp(t));
            } else {
                let gap = t.steps_since(expected) as usize;
                if gap > max_gap_steps {
                    return Err(Error::GridGap {
                        at: t,
                        gap_steps: gap,
                        limit: max_gap_steps,
                    });
                }
                values.extend(core::iter::repeat(f64::NAN).take(gap));
            }
            if price.is_finite() && !(MARKET_FLOOR..=MARKET_CAP).contains(&price) {
                warnings.push(LoadWarning {
                    at: t,
                    message: alloc::format!(
                        "price {price} outside market limits [{MARKET_FLOOR}, {MARKET_CAP}]"
                    ),
                });
            }
            values.push(price);
            expected = t.add_steps(1);
        }
        Ok((
            PriceSeries {
                start,
                values,
                region: region.into(),
            },
            warnings,
        ))
    }

    pub fn region(&self) -> &str {
        &self.region
    }

    pub fn start(&self) -> Timestamp {
        self.start
    }

    /// Grid step in seconds (fixed).
    pub fn step_secs(&self) -> i64 {
        STEP_SECS
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn timestamp_at(&self, idx: usize) -> Timestamp {
        self.start.add_steps(idx as i64)
    }

    /// Grid index of `t`, if it falls inside the series.
    pub fn index_of(&self, t: Timestamp) -> Option<usize> {
        if t < self.start || !t.is_aligned() {
            return None;
        }
        let steps = t.steps_since(self.start);
        (steps >= 0 && (steps as usize) < self.values.len()).then_some(steps as usize)
    }

    /// Timestamp one step past the last entry.
    pub fn end(&self) -> Timestamp {
        self.start.add_steps(self.values.len() as i64)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Timestamp, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| (self.start.add_steps(i as i64), *v))
    }

    /// Replace the value vector, keeping grid metadata. Lengths must match.
    pub fn with_values(&self, values: Vec<f64>) -> Result<PriceSeries> {
        if values.len() != self.values.len() {
            return Err(Error::DimensionMismatch(alloc::format!(
                "replacement has {} values, series has {}",
                values.len(),
                self.values.len()
            )));
        }
        Ok(PriceSeries {
            start: self.start,
            values,
            region: self.region.clone(),
        })
    }
}

/// One weather observation record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeatherObs {
    pub wind_kmh: f64,
    pub temp_c: f64,
    pub humidity_pct: f64,
    pub cloud_pct: f64,
}

/// Per-station weather aligned to the price grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WeatherStation {
    pub name: String,
    pub wind_kmh: Vec<f64>,
    pub temp_c: Vec<f64>,
    pub humidity_pct: Vec<f64>,
    pub cloud_pct: Vec<f64>,
}

/// Weather inputs for all stations, aligned to the same grid as the prices.
#[derive(Debug, Clone, PartialEq)]
pub struct WeatherSeries {
    start: Timestamp,
    len: usize,
    stations: Vec<WeatherStation>,
}

impl WeatherSeries {
    /// Align sparse per-station observations to the `[start, start + len)` grid.
    ///
    /// Values are forward-filled for up to `max_ffill_steps` grid steps
    /// (weather varies slowly relative to the 5-minute grid); longer gaps are
    /// an error. Humidity and cloud cover must lie in `[0, 100]`.
    pub fn from_observations(
        start: Timestamp,
        len: usize,
        stations: Vec<(String, Vec<(Timestamp, WeatherObs)>)>,
        max_ffill_steps: usize,
    ) -> Result<Self> {
        if !start.is_aligned() {
            return Err(Error::MisalignedTimestamp(start, STEP_SECS));
        }
        let mut aligned = Vec::with_capacity(stations.len());
        for (name, mut obs) in stations {
            obs.sort_by_key(|(t, _)| *t);
            for (t, o) in &obs {
                if !(0.0..=100.0).contains(&o.humidity_pct) || !(0.0..=100.0).contains(&o.cloud_pct)
                {
                    return Err(Error::invalid(alloc::format!(
                        "station {name}: humidity/cloud outside [0, 100] at {t}"
                    )));
                }
            }
            let mut station = WeatherStation {
                name: name.clone(),
                wind_kmh: Vec::with_capacity(len),
                temp_c: Vec::with_capacity(len),
                humidity_pct: Vec::with_capacity(len),
                cloud_pct: Vec::with_capacity(len),
            };
            let mut cursor = 0usize;
            let mut current: Option<(Timestamp, WeatherObs)> = None;
            for i in 0..len {
                let t = start.add_steps(i as i64);
                while cursor < obs.len() && obs[cursor].0 <= t {
                    current = Some(obs[cursor]);
                    cursor += 1;
                }
                let (obs_t, o) = current.ok_or_else(|| {
                    Error::invalid(alloc::format!(
                        "station {name}: no weather observation at or before {t}"
                    ))
                })?;
                let age = t.steps_since(obs_t);
                if age > max_ffill_steps as i64 {
                    return Err(Error::invalid(alloc::format!(
                        "station {name}: weather gap of {age} steps at {t} exceeds forward-fill limit {max_ffill_steps}"
                    )));
                }
                station.wind_kmh.push(o.wind_kmh);
                station.temp_c.push(o.temp_c);
                station.humidity_pct.push(o.humidity_pct);
                station.cloud_pct.push(o.cloud_pct);
            }
            aligned.push(station);
        }
        Ok(WeatherSeries {
            start,
            len,
            stations: aligned,
        })
    }

    pub fn start(&self) -> Timestamp {
        self.start
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn stations(&self) -> &[WeatherStation] {
        &self.stations
    }

    pub fn index_of(&self, t: Timestamp) -> Option<usize> {
        if t < self.start || !t.is_aligned() {
            return None;
        }
        let steps = t.steps_since(self.start);
        (steps >= 0 && (steps as usize) < self.len).then_some(steps as usize)
    }
}
