//! Forecast combination by quantile regression.
//!
//! QRA regresses observed prices on constituent *point* inputs (post-processed
//! medians plus point forecasts); the per-quantile variant feeds each level's
//! own constituent predictions instead, so every level gets its own feature
//! set. Both reduce to [`crate::qr::fit_qr`] on an assembled matrix with an
//! intercept, with unconstrained coefficients.
//!
//! Constituent columns are ordered quantile models first, then point models,
//! for both variants; the median rows of QRA and the per-quantile variant
//! therefore coincide exactly, and so do their median forecasts.

use alloc::string::String;
use alloc::vec::Vec;

use crate::qr::{self, QrModel};
use crate::quantile::QuantileSurface;
use crate::time::Timestamp;
use crate::{Error, Result};

/// Combination flavour.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnsembleKind {
    /// Point-input quantile regression averaging.
    Qra,
    /// Per-quantile inputs plus point forecasts.
    QQra,
}

impl EnsembleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EnsembleKind::Qra => "qra",
            EnsembleKind::QQra => "qqra",
        }
    }
}

/// Aligned constituent forecasts over a common timestamp grid.
pub struct ConstituentSet<'a> {
    /// Quantile models: `(name, surface)`.
    pub quantile: Vec<(&'a str, &'a QuantileSurface)>,
    /// Point models: `(name, series, timestamps)`.
    pub point: Vec<(&'a str, &'a [f64], &'a [Timestamp])>,
}

/// Regressor matrix (intercept first) plus the constituent manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct AssembledInputs {
    pub rows: Vec<f64>,
    pub width: usize,
    pub timestamps: Vec<Timestamp>,
    pub manifest: Vec<String>,
}

/// One fitted per-level combiner.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleModel {
    pub kind: EnsembleKind,
    pub level: f64,
    /// Intercept first, then one coefficient per manifest entry.
    pub coefficients: Vec<f64>,
    pub manifest: Vec<String>,
    pub rank_deficient: bool,
    pub objective: f64,
}

fn check_alignment(base: &[Timestamp], other: &[Timestamp]) -> Result<()> {
    if base.len() != other.len() {
        return Err(Error::DimensionMismatch(alloc::format!(
            "constituent row counts differ: {} vs {}",
            base.len(),
            other.len()
        )));
    }
    for (a, b) in base.iter().zip(other) {
        if a != b {
            return Err(Error::TimestampMismatch(*b));
        }
    }
    Ok(())
}

/// Build the regressor matrix for one level.
///
/// QRA rows hold each quantile constituent's post-processed *median* plus the
/// point forecasts, identically at every level; the per-quantile rows hold
/// each constituent's level-`q` prediction plus the point forecasts.
pub fn assemble_inputs(
    kind: EnsembleKind,
    set: &ConstituentSet<'_>,
    level: f64,
) -> Result<AssembledInputs> {
    if set.quantile.is_empty() && set.point.is_empty() {
        return Err(Error::invalid("no constituents supplied"));
    }
    let base: &[Timestamp] = if let Some((_, s)) = set.quantile.first() {
        s.timestamps()
    } else {
        set.point[0].2
    };
    for (_, s) in &set.quantile {
        check_alignment(base, s.timestamps())?;
    }
    for (_, _, ts) in &set.point {
        check_alignment(base, ts)?;
    }

    let mut columns: Vec<(String, Vec<f64>)> = Vec::new();
    for (name, surface) in &set.quantile {
        let pick = match kind {
            EnsembleKind::Qra => 0.5,
            EnsembleKind::QQra => level,
        };
        let idx = surface.level_index(pick).ok_or_else(|| {
            Error::invalid(alloc::format!("constituent {name} lacks level {pick}"))
        })?;
        columns.push(((*name).into(), surface.level_series(idx)));
    }
    for (name, series, _) in &set.point {
        columns.push(((*name).into(), series.to_vec()));
    }

    let n = base.len();
    let width = columns.len() + 1;
    let mut rows = Vec::with_capacity(n * width);
    for i in 0..n {
        rows.push(1.0);
        for (_, col) in &columns {
            rows.push(col[i]);
        }
    }
    Ok(AssembledInputs {
        rows,
        width,
        timestamps: base.to_vec(),
        manifest: columns.into_iter().map(|(n, _)| n).collect(),
    })
}

/// Fit one level's combiner on assembled training inputs.
pub fn fit_ensemble(
    kind: EnsembleKind,
    inputs: &AssembledInputs,
    targets: &[f64],
    level: f64,
) -> Result<EnsembleModel> {
    // Drop rows with missing targets or inputs; the LP needs finite data.
    let n = inputs.timestamps.len();
    if targets.len() != n {
        return Err(Error::DimensionMismatch("targets vs assembled rows".into()));
    }
    let mut rows = Vec::with_capacity(inputs.rows.len());
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let row = &inputs.rows[i * inputs.width..(i + 1) * inputs.width];
        if targets[i].is_finite() && row.iter().all(|v| v.is_finite()) {
            rows.extend_from_slice(row);
            y.push(targets[i]);
        }
    }
    let model: QrModel = qr::fit_qr(&rows, inputs.width, &y, level)?;
    Ok(EnsembleModel {
        kind,
        level,
        coefficients: model.coefficients,
        manifest: inputs.manifest.clone(),
        rank_deficient: model.rank_deficient,
        objective: model.objective,
    })
}

/// Predict one level from assembled inputs; the manifest must match the one
/// the model was fitted with.
pub fn predict_ensemble(model: &EnsembleModel, inputs: &AssembledInputs) -> Result<Vec<f64>> {
    if model.manifest != inputs.manifest {
        return Err(Error::invalid(alloc::format!(
            "constituent manifest mismatch: fitted on {:?}, given {:?}",
            model.manifest,
            inputs.manifest
        )));
    }
    let qm = QrModel {
        level: model.level,
        coefficients: model.coefficients.clone(),
        objective: model.objective,
        rank_deficient: model.rank_deficient,
    };
    qr::predict_qr(&qm, &inputs.rows, inputs.width)
}
