//! CSV readers and writers for the external file formats.
//!
//! Price CSV: `timestamp,price` (ISO-8601 local time, AUD/MWh; an empty
//! price marks a missing observation). Weather CSV:
//! `timestamp,station,wind_kmh,temp_c,humidity_pct,cloud_pct`. Prosumer CSV:
//! `timestamp,demand_kwh,generation_kwh` at 30-minute resolution.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use chrono::NaiveDateTime;

use nemcast_core::series::{LoadWarning, PriceSeries, WeatherObs, WeatherSeries};
use nemcast_core::time::Timestamp;

use crate::error::{CliError, Result};

/// Parse an ISO-8601 local timestamp (`2018-01-01T00:05:00`, space separator
/// also accepted) onto the market-time grid.
pub fn parse_timestamp(text: &str) -> Result<Timestamp> {
    let normalized = text.trim().replace(' ', "T");
    let dt = NaiveDateTime::parse_from_str(&normalized, "%Y-%m-%dT%H:%M:%S")
        .or_else(|_| NaiveDateTime::parse_from_str(&normalized, "%Y-%m-%dT%H:%M"))
        .map_err(|e| CliError::validation(format!("bad timestamp {text:?}: {e}")))?;
    Ok(Timestamp(dt.and_utc().timestamp()))
}

pub fn parse_date(text: &str) -> Result<Timestamp> {
    let date = chrono::NaiveDate::parse_from_str(text.trim(), "%Y-%m-%d")
        .map_err(|e| CliError::validation(format!("bad date {text:?}: {e}")))?;
    Ok(Timestamp(
        date.and_hms_opt(0, 0, 0).unwrap().and_utc().timestamp(),
    ))
}

/// Load and grid-validate a price CSV.
pub fn load_price_csv(
    path: &Path,
    region: &str,
    max_gap_steps: usize,
) -> Result<(PriceSeries, Vec<LoadWarning>)> {
    let file = File::open(path)
        .map_err(|e| CliError::validation(format!("cannot open {path:?}: {e}")))?;
    let mut rows: Vec<(Timestamp, f64)> = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line.starts_with("timestamp")) {
            continue;
        }
        let (ts_text, price_text) = line.split_once(',').ok_or_else(|| {
            CliError::validation(format!("{path:?}:{}: expected timestamp,price", lineno + 1))
        })?;
        let ts = parse_timestamp(ts_text)
            .map_err(|e| CliError::validation(format!("{path:?}:{}: {e}", lineno + 1)))?;
        let price = if price_text.trim().is_empty() {
            f64::NAN
        } else {
            price_text.trim().parse::<f64>().map_err(|e| {
                CliError::validation(format!("{path:?}:{}: bad price: {e}", lineno + 1))
            })?
        };
        rows.push((ts, price));
    }
    Ok(PriceSeries::from_observations(region, rows, max_gap_steps)?)
}

/// Write a price series in canonical form; reloading reproduces the file
/// byte for byte.
pub fn write_price_csv(path: &Path, series: &PriceSeries) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "timestamp,price")?;
    for (ts, value) in series.iter() {
        if value.is_nan() {
            writeln!(w, "{ts},")?;
        } else {
            writeln!(w, "{ts},{value}")?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Load per-station weather observations aligned to the price grid.
pub fn load_weather_csv(
    path: &Path,
    grid_start: Timestamp,
    grid_len: usize,
    max_ffill_steps: usize,
) -> Result<WeatherSeries> {
    let file = File::open(path)
        .map_err(|e| CliError::validation(format!("cannot open {path:?}: {e}")))?;
    let mut stations: BTreeMap<String, Vec<(Timestamp, WeatherObs)>> = BTreeMap::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line.starts_with("timestamp")) {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(CliError::validation(format!(
                "{path:?}:{}: expected 6 columns",
                lineno + 1
            )));
        }
        let ts = parse_timestamp(fields[0])?;
        let parse = |i: usize| -> Result<f64> {
            fields[i].trim().parse::<f64>().map_err(|e| {
                CliError::validation(format!("{path:?}:{}: column {i}: {e}", lineno + 1))
            })
        };
        stations.entry(fields[1].trim().to_string()).or_default().push((
            ts,
            WeatherObs {
                wind_kmh: parse(2)?,
                temp_c: parse(3)?,
                humidity_pct: parse(4)?,
                cloud_pct: parse(5)?,
            },
        ));
    }
    Ok(WeatherSeries::from_observations(
        grid_start,
        grid_len,
        stations.into_iter().collect(),
        max_ffill_steps,
    )?)
}

/// A prosumer's half-hourly demand/generation records.
pub fn load_prosumer_csv(path: &Path) -> Result<BTreeMap<Timestamp, (f64, f64)>> {
    let file = File::open(path)
        .map_err(|e| CliError::validation(format!("cannot open {path:?}: {e}")))?;
    let mut out = BTreeMap::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line.starts_with("timestamp")) {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(CliError::validation(format!(
                "{path:?}:{}: expected timestamp,demand_kwh,generation_kwh",
                lineno + 1
            )));
        }
        let ts = parse_timestamp(fields[0])?;
        let d = fields[1].trim().parse::<f64>().map_err(|e| {
            CliError::validation(format!("{path:?}:{}: demand: {e}", lineno + 1))
        })?;
        let g = fields[2].trim().parse::<f64>().map_err(|e| {
            CliError::validation(format!("{path:?}:{}: generation: {e}", lineno + 1))
        })?;
        if out.insert(ts, (d, g)).is_some() {
            return Err(CliError::validation(format!(
                "{path:?}: duplicate timestamp {ts}"
            )));
        }
    }
    Ok(out)
}

/// Generic point-forecast file (`timestamp,price`), used for external
/// baselines.
pub fn load_point_csv(path: &Path) -> Result<BTreeMap<Timestamp, f64>> {
    let file = File::open(path)
        .map_err(|e| CliError::validation(format!("cannot open {path:?}: {e}")))?;
    let mut out = BTreeMap::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line.starts_with("timestamp")) {
            continue;
        }
        let (ts_text, price_text) = line.split_once(',').ok_or_else(|| {
            CliError::validation(format!("{path:?}:{}: expected timestamp,price", lineno + 1))
        })?;
        let ts = parse_timestamp(ts_text)?;
        let price = price_text.trim().parse::<f64>().map_err(|e| {
            CliError::validation(format!("{path:?}:{}: bad price: {e}", lineno + 1))
        })?;
        out.insert(ts, price);
    }
    Ok(out)
}
