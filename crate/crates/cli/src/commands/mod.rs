//! Implementations behind the CLI subcommands.

pub mod backtest;
pub mod economic;
pub mod evaluate;
pub mod filter;
pub mod ingest;
pub mod stats;
pub mod synth;

use std::path::Path;

use nemcast_core::series::{PriceSeries, WeatherSeries};

use crate::config::RunConfig;
use crate::error::Result;
use crate::io;

/// Load the configured price and (optional) weather inputs, printing load
/// warnings to stderr.
pub fn load_inputs(cfg: &RunConfig) -> Result<(PriceSeries, Option<WeatherSeries>)> {
    let (prices, warnings) = io::load_price_csv(
        &cfg.data.price_csv,
        &cfg.data.region,
        cfg.data.max_gap_steps,
    )?;
    for w in &warnings {
        eprintln!("warning: {}: {}", w.at, w.message);
    }
    let weather = match (&cfg.data.weather_csv, cfg.features.weather) {
        (Some(path), true) if !path.as_os_str().is_empty() => Some(io::load_weather_csv(
            path,
            prices.start(),
            prices.len(),
            cfg.data.weather_ffill_steps,
        )?),
        _ => None,
    };
    Ok((prices, weather))
}

pub(crate) fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    Ok(())
}
