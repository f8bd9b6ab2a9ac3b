//! Run artifact directory: plain CSV surfaces plus a TOML manifest carrying
//! the config hash, so reports are regenerable and mismatched artifact/config
//! pairs are refused.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use nemcast_core::backtest::{BacktestResult, DayForecast};
use nemcast_core::cdf::PredictiveCdf;
use nemcast_core::quantile::QuantileSurface;
use nemcast_core::time::Timestamp;

use crate::error::{CliError, Result};
use crate::io::parse_timestamp;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestConstituent {
    pub name: String,
    /// `quantile` or `point`.
    pub kind: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Conventions {
    pub cdf_construction: String,
    pub smoothing: String,
    pub kurtosis: String,
    pub skew: String,
}

impl Default for Conventions {
    fn default() -> Self {
        Conventions {
            cdf_construction: PredictiveCdf::CONSTRUCTION.to_string(),
            smoothing: "2x12 centred moving average (13 taps, half-weight ends), edges truncated and renormalised".to_string(),
            kurtosis: "non-excess m4/m2^2 (normal = 3)".to_string(),
            skew: "m3/m2^1.5 with 1/n central moments".to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub config_hash: String,
    pub seed: u64,
    pub first_day: String,
    pub n_days: usize,
    pub levels: Vec<f64>,
    pub constituents: Vec<ManifestConstituent>,
    pub ensembles: Vec<String>,
    pub conventions: Conventions,
}

pub fn date_dir(day: Timestamp) -> String {
    let (y, m, d) = day.ymd();
    format!("{y:04}-{m:02}-{d:02}")
}

fn write_surface_csv(path: &Path, surface: &QuantileSurface) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    write!(w, "timestamp")?;
    for q in surface.levels() {
        write!(w, ",q{q}")?;
    }
    writeln!(w)?;
    for i in 0..surface.n_rows() {
        write!(w, "{}", surface.timestamps()[i])?;
        for v in surface.row(i) {
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

fn write_point_csv(path: &Path, timestamps: &[Timestamp], values: &[f64]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "timestamp,value")?;
    for (t, v) in timestamps.iter().zip(values) {
        writeln!(w, "{t},{v}")?;
    }
    w.flush()?;
    Ok(())
}

/// Persist a backtest result. Partial artifacts from aborted runs keep the
/// days already written.
pub fn write_artifact(
    out: &Path,
    result: &BacktestResult,
    manifest: &Manifest,
    canonical_config: &str,
) -> Result<()> {
    fs::create_dir_all(out)?;
    fs::write(
        out.join("manifest.toml"),
        toml::to_string_pretty(manifest)
            .map_err(|e| CliError::validation(format!("manifest: {e}")))?,
    )?;
    fs::write(out.join("config.toml"), canonical_config)?;

    // Causality audit trail.
    {
        let mut w = BufWriter::new(fs::File::create(out.join("audit.csv"))?);
        writeln!(w, "day,price_input_end")?;
        for entry in &result.audit {
            writeln!(w, "{},{}", entry.day, entry.price_input_end)?;
        }
        w.flush()?;
    }

    let surfaces = out.join("surfaces");
    let ensembles = out.join("ensembles");
    fs::create_dir_all(&surfaces)?;
    fs::create_dir_all(&ensembles)?;
    for record in &result.days {
        let sd = surfaces.join(date_dir(record.day));
        fs::create_dir_all(&sd)?;
        for c in &record.constituents {
            match &c.forecast {
                DayForecast::Quantile {
                    raw,
                    smoothed,
                    shifted,
                } => {
                    write_surface_csv(&sd.join(format!("{}_raw.csv", c.name)), raw)?;
                    write_surface_csv(&sd.join(format!("{}_smoothed.csv", c.name)), smoothed)?;
                    write_surface_csv(&sd.join(format!("{}_shifted.csv", c.name)), shifted)?;
                }
                DayForecast::Point {
                    raw,
                    smoothed,
                    shifted,
                } => {
                    write_point_csv(&sd.join(format!("{}_raw.csv", c.name)), &record.timestamps, raw)?;
                    write_point_csv(
                        &sd.join(format!("{}_smoothed.csv", c.name)),
                        &record.timestamps,
                        smoothed,
                    )?;
                    write_point_csv(
                        &sd.join(format!("{}_shifted.csv", c.name)),
                        &record.timestamps,
                        shifted,
                    )?;
                }
            }
        }
        let ed = ensembles.join(date_dir(record.day));
        fs::create_dir_all(&ed)?;
        for e in &record.ensembles {
            write_surface_csv(&ed.join(format!("{}.csv", e.kind.as_str())), &e.surface)?;
        }
    }

    // Daily coefficient log per ensemble kind, for weight-evolution analysis.
    let coef_dir = out.join("coefficients");
    fs::create_dir_all(&coef_dir)?;
    for kind in &manifest.ensembles {
        let mut w = BufWriter::new(fs::File::create(coef_dir.join(format!("{kind}.csv")))?);
        let mut header_written = false;
        for record in &result.days {
            for e in &record.ensembles {
                if e.kind.as_str() != kind {
                    continue;
                }
                if !header_written {
                    write!(w, "day,level,intercept")?;
                    for name in &e.manifest {
                        write!(w, ",{name}")?;
                    }
                    writeln!(w)?;
                    header_written = true;
                }
                for (level, coefs) in &e.coefficients {
                    write!(w, "{},{level}", date_dir(record.day))?;
                    for c in coefs {
                        write!(w, ",{c}")?;
                    }
                    writeln!(w)?;
                }
            }
        }
        w.flush()?;
    }

    // In-sample diagnostics (training-window pinball of ensemble and
    // constituent columns).
    let diag_dir = out.join("diagnostics");
    fs::create_dir_all(&diag_dir)?;
    {
        let mut w = BufWriter::new(fs::File::create(diag_dir.join("in_sample.csv"))?);
        let mut header_written = false;
        for record in &result.days {
            for e in &record.ensembles {
                if !header_written {
                    write!(w, "day,kind,level,ensemble_pinball")?;
                    for name in &e.manifest {
                        write!(w, ",{name}")?;
                    }
                    writeln!(w)?;
                    header_written = true;
                }
                for diag in &e.in_sample {
                    write!(
                        w,
                        "{},{},{},{}",
                        date_dir(record.day),
                        e.kind.as_str(),
                        diag.level,
                        diag.ensemble_pinball
                    )?;
                    for v in &diag.constituent_pinball {
                        write!(w, ",{v}")?;
                    }
                    writeln!(w)?;
                }
            }
        }
        w.flush()?;
    }
    Ok(())
}

/// A constituent's persisted day forecast.
#[derive(Debug, Clone, PartialEq)]
pub enum LoadedForecast {
    Quantile(QuantileSurface),
    Point(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedDay {
    pub day: Timestamp,
    pub timestamps: Vec<Timestamp>,
    /// `(kind, surface)` per ensemble.
    pub ensembles: Vec<(String, QuantileSurface)>,
    /// `(name, shifted forecast)` per constituent.
    pub constituents: Vec<(String, LoadedForecast)>,
}

#[derive(Debug, Clone)]
pub struct LoadedArtifact {
    pub manifest: Manifest,
    pub root: PathBuf,
    pub days: Vec<LoadedDay>,
}

fn read_surface_csv(path: &Path) -> Result<QuantileSurface> {
    let file = fs::File::open(path)
        .map_err(|e| CliError::validation(format!("cannot open {path:?}: {e}")))?;
    let mut lines = BufReader::new(file).lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::validation(format!("{path:?}: empty surface file")))??;
    let levels: Vec<f64> = header
        .split(',')
        .skip(1)
        .map(|h| {
            h.trim_start_matches('q')
                .parse::<f64>()
                .map_err(|e| CliError::validation(format!("{path:?}: level {h:?}: {e}")))
        })
        .collect::<Result<_>>()?;
    let mut timestamps = Vec::new();
    let mut values = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let ts = parse_timestamp(fields.next().unwrap())?;
        timestamps.push(ts);
        for f in fields {
            values.push(
                f.parse::<f64>()
                    .map_err(|e| CliError::validation(format!("{path:?}: {e}")))?,
            );
        }
    }
    Ok(QuantileSurface::new(levels, timestamps, values)?)
}

fn read_point_csv(path: &Path) -> Result<(Vec<Timestamp>, Vec<f64>)> {
    let file = fs::File::open(path)
        .map_err(|e| CliError::validation(format!("cannot open {path:?}: {e}")))?;
    let mut timestamps = Vec::new();
    let mut values = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if lineno == 0 || line.trim().is_empty() {
            continue;
        }
        let (ts, v) = line
            .split_once(',')
            .ok_or_else(|| CliError::validation(format!("{path:?}: expected two columns")))?;
        timestamps.push(parse_timestamp(ts)?);
        values.push(
            v.parse::<f64>()
                .map_err(|e| CliError::validation(format!("{path:?}: {e}")))?,
        );
    }
    Ok((timestamps, values))
}

pub fn read_manifest(root: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(root.join("manifest.toml"))
        .map_err(|e| CliError::validation(format!("cannot read manifest in {root:?}: {e}")))?;
    let manifest: Manifest = toml::from_str(&text)
        .map_err(|e| CliError::validation(format!("manifest: {e}")))?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(CliError::validation(format!(
            "artifact format {} unsupported (expected {FORMAT_VERSION})",
            manifest.format_version
        )));
    }
    Ok(manifest)
}

/// Load an artifact, verifying it carries the expected config hash.
pub fn read_artifact(root: &Path, expected_hash: Option<&str>) -> Result<LoadedArtifact> {
    let manifest = read_manifest(root)?;
    if let Some(expected) = expected_hash {
        if manifest.config_hash != expected {
            return Err(CliError::validation(format!(
                "artifact was produced by config {} but the supplied config hashes to {expected}",
                manifest.config_hash
            )));
        }
    }
    let first_day = crate::io::parse_date(&manifest.first_day)?;
    let mut days = Vec::with_capacity(manifest.n_days);
    for d in 0..manifest.n_days {
        let day = first_day.add_days(d as i64);
        let dir = date_dir(day);
        let mut ensembles = Vec::new();
        for kind in &manifest.ensembles {
            let surface = read_surface_csv(&root.join("ensembles").join(&dir).join(format!("{kind}.csv")))?;
            ensembles.push((kind.clone(), surface));
        }
        let mut constituents = Vec::new();
        for c in &manifest.constituents {
            let path = root
                .join("surfaces")
                .join(&dir)
                .join(format!("{}_shifted.csv", c.name));
            let loaded = if c.kind == "point" {
                LoadedForecast::Point(read_point_csv(&path)?.1)
            } else {
                LoadedForecast::Quantile(read_surface_csv(&path)?)
            };
            constituents.push((c.name.clone(), loaded));
        }
        let timestamps = ensembles
            .first()
            .map(|(_, s)| s.timestamps().to_vec())
            .unwrap_or_default();
        days.push(LoadedDay {
            day,
            timestamps,
            ensembles,
            constituents,
        });
    }
    Ok(LoadedArtifact {
        manifest,
        root: root.to_path_buf(),
        days,
    })
}
