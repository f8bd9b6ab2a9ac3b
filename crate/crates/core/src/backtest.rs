//! The daily rolling backtest: spike-filter, retrain constituents on their
//! trailing windows, forecast 24 hours, smooth, AR-shift, then fit and apply
//! the quantile-regression ensembles on the trailing window of stored
//! out-of-sample constituent forecasts.
//!
//! Forecasts are issued once per day at midnight. For each issue day the
//! engine hands models a price series *sliced* at that midnight, so no stage
//! can read later observations; the audit trail records the slice ends.
//! Weather is treated as a day-ahead forecast product, valid at the target
//! timestamp and known at issue time.
//!
//! Training signals (targets, AR residuals, ensemble regressands) use the
//! spike-imputed series throughout; evaluation against raw prices happens
//! downstream.

use alloc::string::String;
use alloc::vec::Vec;

use crate::ensemble::{self, ConstituentSet, EnsembleKind};
use crate::features::{build_design_matrix, FeatureConfig, RowPurpose};
use crate::forest::{self, ForestHyperparams};
use crate::postprocess;
use crate::qr;
use crate::quantile::{QuantileSurface, NINE_LEVELS};
use crate::series::{PriceSeries, WeatherSeries};
use crate::spike::{self, SpikeConfig};
use crate::svr::{self, SvrParams};
use crate::time::{Timestamp, STEPS_PER_DAY};
use crate::windows::{rolling_windows, RollingWindowPlan};
use crate::{Error, Result};

/// Model family of one constituent.
#[derive(Debug, Clone, PartialEq)]
pub enum ConstituentModel {
    LinearQr,
    Forest(ForestHyperparams),
    Svr(SvrParams),
}

/// One constituent: a model plus its trailing training-window length.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstituentConfig {
    pub name: String,
    pub model: ConstituentModel,
    pub window_days: u32,
}

/// Full backtest configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct BacktestConfig {
    pub levels: Vec<f64>,
    pub constituents: Vec<ConstituentConfig>,
    pub spike: SpikeConfig,
    pub features: FeatureConfig,
    pub smoothing_order: usize,
    pub ar_order: usize,
    pub ensemble_days: u32,
    pub ensembles: Vec<EnsembleKind>,
    pub seed: u64,
}

impl Default for BacktestConfig {
    fn default() -> Self {
        BacktestConfig {
            levels: NINE_LEVELS.to_vec(),
            constituents: alloc::vec![
                ConstituentConfig {
                    name: "linear_qr".into(),
                    model: ConstituentModel::LinearQr,
                    window_days: 365,
                },
                ConstituentConfig {
                    name: "qrf_short".into(),
                    model: ConstituentModel::Forest(ForestHyperparams::default()),
                    window_days: 30,
                },
                ConstituentConfig {
                    name: "qrf_medium".into(),
                    model: ConstituentModel::Forest(ForestHyperparams::default()),
                    window_days: 90,
                },
                ConstituentConfig {
                    name: "qrf_long".into(),
                    model: ConstituentModel::Forest(ForestHyperparams::default()),
                    window_days: 365,
                },
                ConstituentConfig {
                    name: "svr".into(),
                    model: ConstituentModel::Svr(SvrParams::default()),
                    window_days: 365,
                },
            ],
            spike: SpikeConfig::default(),
            features: FeatureConfig::default(),
            smoothing_order: 12,
            ar_order: 2,
            ensemble_days: 35,
            ensembles: alloc::vec![EnsembleKind::Qra, EnsembleKind::QQra],
            seed: 0,
        }
    }
}

impl BacktestConfig {
    fn validate(&self) -> Result<()> {
        if self.levels.is_empty() || self.levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("levels must be strictly increasing"));
        }
        if self.levels.iter().any(|q| !(0.0 < *q && *q < 1.0)) {
            return Err(Error::invalid("levels must lie in (0, 1)"));
        }
        if !self.levels.contains(&0.5) {
            return Err(Error::invalid("levels must include the median"));
        }
        if self.constituents.is_empty() {
            return Err(Error::invalid("need at least one constituent"));
        }
        if self.ensemble_days == 0 {
            return Err(Error::invalid("ensemble window must be positive"));
        }
        Ok(())
    }

    fn plan(&self, first_test_day: Timestamp, n_test_days: usize) -> RollingWindowPlan {
        RollingWindowPlan {
            first_test_day,
            n_test_days,
            spike_days: self.spike.annual_days,
            constituent_days: self.constituents.iter().map(|c| c.window_days).collect(),
            ensemble_days: self.ensemble_days,
        }
    }
}

/// Raw, smoothed and AR-shifted forecasts for one constituent-day.
#[derive(Debug, Clone, PartialEq)]
pub enum DayForecast {
    Quantile {
        raw: QuantileSurface,
        smoothed: QuantileSurface,
        shifted: QuantileSurface,
    },
    Point {
        raw: Vec<f64>,
        smoothed: Vec<f64>,
        shifted: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstituentDayOutput {
    pub name: String,
    pub forecast: DayForecast,
    /// The AR shift model fitted unstable (shift still applied as computed).
    pub ar_unstable: bool,
}

/// In-sample (training window) pinball of the fitted ensemble and of each
/// constituent column, one entry per level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelFitDiagnostics {
    pub level: f64,
    pub ensemble_pinball: f64,
    pub constituent_pinball: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleDayOutput {
    pub kind: EnsembleKind,
    /// Final surface, quantile crossings removed by rearrangement.
    pub surface: QuantileSurface,
    /// Per level: the fitted coefficient vector (intercept first).
    pub coefficients: Vec<(f64, Vec<f64>)>,
    pub manifest: Vec<String>,
    pub in_sample: Vec<LevelFitDiagnostics>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DailyRecord {
    pub day: Timestamp,
    pub timestamps: Vec<Timestamp>,
    pub constituents: Vec<ConstituentDayOutput>,
    pub ensembles: Vec<EnsembleDayOutput>,
}

/// Per issue-day causality audit entry: the end of the price slice every
/// model was allowed to read.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditEntry {
    pub day: Timestamp,
    pub price_input_end: Timestamp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BacktestResult {
    pub first_test_day: Timestamp,
    pub days: Vec<DailyRecord>,
    pub audit: Vec<AuditEntry>,
}

/// Assert that no issue day was allowed price inputs at or past its midnight.
pub fn verify_causality(audit: &[AuditEntry]) -> Result<()> {
    for entry in audit {
        if entry.price_input_end > entry.day {
            return Err(Error::invalid(alloc::format!(
                "causality violation: day {} read prices through {}",
                entry.day,
                entry.price_input_end
            )));
        }
    }
    Ok(())
}

fn mix_seed(base: u64, a: u64, b: u64) -> u64 {
    let mut x = base
        ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ b.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Per-constituent rolling state across issue days.
struct ConstituentState {
    /// Smoothed median (or smoothed point) per stored timestamp, for AR
    /// residuals.
    residuals: Vec<f64>,
    /// Stored shifted forecasts per processed day, for ensemble training.
    shifted_quantile: Vec<QuantileSurface>,
    shifted_point: Vec<Vec<f64>>,
    timestamps: Vec<Timestamp>,
}

/// Run the full daily backtest.
pub fn run_backtest(
    prices: &PriceSeries,
    weather: Option<&WeatherSeries>,
    cfg: &BacktestConfig,
    first_test_day: Timestamp,
    n_test_days: usize,
) -> Result<BacktestResult> {
    cfg.validate()?;
    let plan = cfg.plan(first_test_day, n_test_days);
    // Validates feasibility and names the earliest feasible day on failure.
    rolling_windows(&plan, prices.start(), prices.len())?;

    // Spike statistics are strictly trailing, so the one-pass imputed series
    // is identical to what an online run would have produced at each t.
    let mask = spike::filter_series(prices, &cfg.spike)?;
    let imputed_values = mask.imputed.values();

    let forecast_first = first_test_day.add_days(-(cfg.ensemble_days as i64));
    let total_days = cfg.ensemble_days as usize + n_test_days;

    let mut states: Vec<ConstituentState> = cfg
        .constituents
        .iter()
        .map(|_| ConstituentState {
            residuals: Vec::new(),
            shifted_quantile: Vec::new(),
            shifted_point: Vec::new(),
            timestamps: Vec::new(),
        })
        .collect();
    let mut records: Vec<DailyRecord> = Vec::with_capacity(n_test_days);
    let mut audit: Vec<AuditEntry> = Vec::with_capacity(total_days);

    for day_ordinal in 0..total_days {
        let day = forecast_first.add_days(day_ordinal as i64);
        let idx = day.steps_since(prices.start()) as usize;
        let stage = |e: Error, s: &'static str| e.at_stage(day, s);

        // Models see only prices strictly before this midnight.
        let sliced = PriceSeries::new(
            prices.region(),
            prices.start(),
            imputed_values[..idx].to_vec(),
        )?;
        audit.push(AuditEntry {
            day,
            price_input_end: prices.timestamp_at(idx - 1).add_steps(1),
        });

        let day_timestamps: Vec<Timestamp> =
            (0..STEPS_PER_DAY).map(|k| day.add_steps(k as i64)).collect();
        let mut day_outputs: Vec<ConstituentDayOutput> = Vec::with_capacity(cfg.constituents.len());

        for (c_idx, constituent) in cfg.constituents.iter().enumerate() {
            let window_start = idx - constituent.window_days as usize * STEPS_PER_DAY;
            let train = build_design_matrix(
                &sliced,
                weather,
                window_start..idx,
                &cfg.features,
                RowPurpose::Training,
            )
            .map_err(|e| stage(e, "design-matrix"))?;
            let predict = build_design_matrix(
                &sliced,
                weather,
                idx..idx + STEPS_PER_DAY,
                &cfg.features,
                RowPurpose::Prediction,
            )
            .map_err(|e| stage(e, "design-matrix"))?;
            if predict.n_rows() != STEPS_PER_DAY {
                return Err(stage(
                    Error::invalid(alloc::format!(
                        "only {} of {STEPS_PER_DAY} prediction rows have complete features",
                        predict.n_rows()
                    )),
                    "design-matrix",
                ));
            }

            let forecast = match &constituent.model {
                ConstituentModel::LinearQr => {
                    let mut values = alloc::vec![0.0f64; STEPS_PER_DAY * cfg.levels.len()];
                    for (l, &q) in cfg.levels.iter().enumerate() {
                        let model = qr::fit_design(&train, q).map_err(|e| stage(e, "linear-qr"))?;
                        let preds =
                            qr::predict_design(&model, &predict).map_err(|e| stage(e, "linear-qr"))?;
                        for (i, p) in preds.iter().enumerate() {
                            values[i * cfg.levels.len() + l] = *p;
                        }
                    }
                    let raw =
                        QuantileSurface::new(cfg.levels.clone(), day_timestamps.clone(), values)?;
                    DayForecast::Quantile {
                        smoothed: raw.clone(),
                        shifted: raw.clone(),
                        raw,
                    }
                }
                ConstituentModel::Forest(hyper) => {
                    let seed = mix_seed(cfg.seed, c_idx as u64, day_ordinal as u64);
                    let f = forest::fit_forest(
                        train.rows_flat(),
                        train.width(),
                        train.targets(),
                        hyper,
                        seed,
                    )
                    .map_err(|e| stage(e, "qrf"))?;
                    let mut values = alloc::vec![0.0f64; STEPS_PER_DAY * cfg.levels.len()];
                    for i in 0..STEPS_PER_DAY {
                        let row = f
                            .predict_levels(predict.row(i), &cfg.levels)
                            .map_err(|e| stage(e, "qrf"))?;
                        values[i * cfg.levels.len()..(i + 1) * cfg.levels.len()]
                            .copy_from_slice(&row);
                    }
                    let raw =
                        QuantileSurface::new(cfg.levels.clone(), day_timestamps.clone(), values)?;
                    DayForecast::Quantile {
                        smoothed: raw.clone(),
                        shifted: raw.clone(),
                        raw,
                    }
                }
                ConstituentModel::Svr(params) => {
                    let params = SvrParams {
                        seed: mix_seed(cfg.seed, c_idx as u64, day_ordinal as u64),
                        ..*params
                    };
                    let model =
                        svr::fit_svr(train.rows_flat(), train.width(), train.targets(), &params)
                            .map_err(|e| stage(e, "svr"))?;
                    let preds = svr::predict_svr(&model, predict.rows_flat(), predict.width())
                        .map_err(|e| stage(e, "svr"))?;
                    DayForecast::Point {
                        smoothed: preds.clone(),
                        shifted: preds.clone(),
                        raw: preds,
                    }
                }
            };
            day_outputs.push(ConstituentDayOutput {
                name: constituent.name.clone(),
                forecast,
                ar_unstable: false,
            });
        }

        // Post-processing: smooth within the day, then AR-shift using the
        // residual history accumulated from previous issue days.
        let median_idx = cfg.levels.iter().position(|q| *q == 0.5).unwrap();
        for (c_idx, output) in day_outputs.iter_mut().enumerate() {
            let state = &mut states[c_idx];
            let ar = if state.residuals.len() >= 10 * cfg.ar_order {
                let window = cfg.ensemble_days as usize * STEPS_PER_DAY;
                let from = state.residuals.len().saturating_sub(window);
                Some(
                    postprocess::fit_ar_residual(&state.residuals[from..], cfg.ar_order)
                        .map_err(|e| stage(e, "ar-fit"))?,
                )
            } else {
                None
            };
            let anchor: Vec<f64> = state
                .residuals
                .iter()
                .rev()
                .take(cfg.ar_order)
                .rev()
                .map(|r| if r.is_finite() { *r } else { 0.0 })
                .collect();

            match &mut output.forecast {
                DayForecast::Quantile {
                    raw,
                    smoothed,
                    shifted,
                } => {
                    *smoothed = postprocess::smooth_surface(raw, cfg.smoothing_order)
                        .map_err(|e| stage(e, "smoothing"))?;
                    if let Some(ar) = &ar {
                        let out = postprocess::shift_quantiles(smoothed, ar, &anchor)
                            .map_err(|e| stage(e, "ar-shift"))?;
                        *shifted = out.surface;
                        output.ar_unstable = out.unstable;
                    } else {
                        *shifted = smoothed.clone();
                    }
                }
                DayForecast::Point {
                    raw,
                    smoothed,
                    shifted,
                } => {
                    *smoothed = postprocess::smooth_series(raw, cfg.smoothing_order)
                        .map_err(|e| stage(e, "smoothing"))?;
                    if let Some(ar) = &ar {
                        let shifts = ar
                            .forecast(&anchor, STEPS_PER_DAY)
                            .map_err(|e| stage(e, "ar-shift"))?;
                        *shifted = smoothed
                            .iter()
                            .zip(&shifts)
                            .map(|(v, s)| v + s)
                            .collect();
                        output.ar_unstable = !ar.is_stable();
                    } else {
                        *shifted = smoothed.clone();
                    }
                }
            }
        }

        // Ensembles for non-warmup days, trained on the stored shifted
        // forecasts over the trailing window.
        let mut day_ensembles: Vec<EnsembleDayOutput> = Vec::new();
        if day >= first_test_day {
            let window_days = cfg.ensemble_days as usize;
            let (train_surfaces, train_points, train_ts) =
                window_views(cfg, &states, window_days)?;
            let targets: Vec<f64> = train_ts
                .iter()
                .map(|t| {
                    let i = prices.index_of(*t).unwrap();
                    imputed_values[i]
                })
                .collect();

            // Today's inputs for prediction.
            let mut today_quantile: Vec<(&str, &QuantileSurface)> = Vec::new();
            let mut today_point: Vec<(&str, &[f64], &[Timestamp])> = Vec::new();
            for (c, out) in cfg.constituents.iter().zip(&day_outputs) {
                match &out.forecast {
                    DayForecast::Quantile { shifted, .. } => {
                        today_quantile.push((c.name.as_str(), shifted));
                    }
                    DayForecast::Point { shifted, .. } => {
                        today_point.push((c.name.as_str(), shifted.as_slice(), &day_timestamps));
                    }
                }
            }
            let today_set = ConstituentSet {
                quantile: today_quantile,
                point: today_point,
            };
            let train_set = ConstituentSet {
                quantile: cfg
                    .constituents
                    .iter()
                    .zip(&train_surfaces)
                    .filter_map(|(c, s)| s.as_ref().map(|s| (c.name.as_str(), s)))
                    .collect(),
                point: cfg
                    .constituents
                    .iter()
                    .zip(&train_points)
                    .filter_map(|(c, p)| {
                        p.as_ref()
                            .map(|p| (c.name.as_str(), p.as_slice(), train_ts.as_slice()))
                    })
                    .collect(),
            };

            for &kind in &cfg.ensembles {
                let mut surface_values =
                    alloc::vec![0.0f64; STEPS_PER_DAY * cfg.levels.len()];
                let mut coefficients = Vec::with_capacity(cfg.levels.len());
                let mut in_sample = Vec::with_capacity(cfg.levels.len());
                let mut manifest: Vec<String> = Vec::new();
                for (l, &q) in cfg.levels.iter().enumerate() {
                    let train_inputs = ensemble::assemble_inputs(kind, &train_set, q)
                        .map_err(|e| stage(e, "ensemble"))?;
                    let model = ensemble::fit_ensemble(kind, &train_inputs, &targets, q)
                        .map_err(|e| stage(e, "ensemble"))?;
                    let predict_inputs = ensemble::assemble_inputs(kind, &today_set, q)
                        .map_err(|e| stage(e, "ensemble"))?;
                    let preds = ensemble::predict_ensemble(&model, &predict_inputs)
                        .map_err(|e| stage(e, "ensemble"))?;
                    for (i, p) in preds.iter().enumerate() {
                        surface_values[i * cfg.levels.len() + l] = *p;
                    }
                    // Constituent in-sample pinball over the same window.
                    let n_cols = train_inputs.width - 1;
                    let mut cons_pinball = alloc::vec![0.0f64; n_cols];
                    let mut n_used = 0usize;
                    for (i, &y) in targets.iter().enumerate() {
                        if !y.is_finite() {
                            continue;
                        }
                        let row =
                            &train_inputs.rows[i * train_inputs.width..(i + 1) * train_inputs.width];
                        if row.iter().any(|v| !v.is_finite()) {
                            continue;
                        }
                        n_used += 1;
                        for c in 0..n_cols {
                            cons_pinball[c] += qr::pinball_loss(y, row[1 + c], q);
                        }
                    }
                    debug_assert!(n_used > 0);
                    in_sample.push(LevelFitDiagnostics {
                        level: q,
                        ensemble_pinball: model.objective,
                        constituent_pinball: cons_pinball,
                    });
                    coefficients.push((q, model.coefficients.clone()));
                    manifest = model.manifest;
                }
                let mut surface = QuantileSurface::new(
                    cfg.levels.clone(),
                    day_timestamps.clone(),
                    surface_values,
                )?;
                surface.rearrange_rows();
                day_ensembles.push(EnsembleDayOutput {
                    kind,
                    surface,
                    coefficients,
                    manifest,
                    in_sample,
                });
            }
        }

        // Update rolling state with today's outputs and (now observable at
        // the *next* midnight) residuals.
        for (c_idx, out) in day_outputs.iter().enumerate() {
            let state = &mut states[c_idx];
            match &out.forecast {
                DayForecast::Quantile {
                    smoothed, shifted, ..
                } => {
                    let median = smoothed.level_series(median_idx);
                    for (k, t) in day_timestamps.iter().enumerate() {
                        let i = prices.index_of(*t).unwrap();
                        state.residuals.push(imputed_values[i] - median[k]);
                    }
                    state.shifted_quantile.push(shifted.clone());
                }
                DayForecast::Point {
                    smoothed, shifted, ..
                } => {
                    for (k, t) in day_timestamps.iter().enumerate() {
                        let i = prices.index_of(*t).unwrap();
                        state.residuals.push(imputed_values[i] - smoothed[k]);
                    }
                    state.shifted_point.push(shifted.clone());
                }
            }
            state.timestamps.extend_from_slice(&day_timestamps);
            // Bound state growth to the windows actually consumed.
            let keep_days = cfg.ensemble_days as usize + 1;
            if state.shifted_quantile.len() > keep_days {
                state.shifted_quantile.remove(0);
            }
            if state.shifted_point.len() > keep_days {
                state.shifted_point.remove(0);
            }
            let keep_rows = keep_days * STEPS_PER_DAY;
            if state.residuals.len() > keep_rows {
                let drop = state.residuals.len() - keep_rows;
                state.residuals.drain(..drop);
            }
            if state.timestamps.len() > keep_rows {
                let drop = state.timestamps.len() - keep_rows;
                state.timestamps.drain(..drop);
            }
        }

        if day >= first_test_day {
            records.push(DailyRecord {
                day,
                timestamps: day_timestamps,
                constituents: day_outputs,
                ensembles: day_ensembles,
            });
        }
    }

    Ok(BacktestResult {
        first_test_day,
        days: records,
        audit,
    })
}

/// Concatenate each constituent's stored shifted forecasts over the trailing
/// `window_days` issue days into window-long views.
#[allow(clippy::type_complexity)]
fn window_views(
    cfg: &BacktestConfig,
    states: &[ConstituentState],
    window_days: usize,
) -> Result<(Vec<Option<QuantileSurface>>, Vec<Option<Vec<f64>>>, Vec<Timestamp>)> {
    let mut surfaces: Vec<Option<QuantileSurface>> = Vec::with_capacity(states.len());
    let mut points: Vec<Option<Vec<f64>>> = Vec::with_capacity(states.len());
    let mut timestamps: Option<Vec<Timestamp>> = None;
    for (c, state) in cfg.constituents.iter().zip(states) {
        match c.model {
            ConstituentModel::Svr(_) => {
                let have = state.shifted_point.len();
                if have < window_days {
                    return Err(Error::InsufficientHistory {
                        required: window_days,
                        available: have,
                    });
                }
                let mut series = Vec::with_capacity(window_days * STEPS_PER_DAY);
                for day_vec in &state.shifted_point[have - window_days..] {
                    series.extend_from_slice(day_vec);
                }
                points.push(Some(series));
                surfaces.push(None);
            }
            _ => {
                let have = state.shifted_quantile.len();
                if have < window_days {
                    return Err(Error::InsufficientHistory {
                        required: window_days,
                        available: have,
                    });
                }
                let days = &state.shifted_quantile[have - window_days..];
                let mut values = Vec::with_capacity(window_days * STEPS_PER_DAY * cfg.levels.len());
                let mut ts = Vec::with_capacity(window_days * STEPS_PER_DAY);
                for s in days {
                    for i in 0..s.n_rows() {
                        values.extend_from_slice(s.row(i));
                    }
                    ts.extend_from_slice(s.timestamps());
                }
                let surface = QuantileSurface::new(cfg.levels.clone(), ts.clone(), values)?;
                if timestamps.is_none() {
                    timestamps = Some(ts);
                }
                surfaces.push(Some(surface));
                points.push(None);
            }
        }
    }
    let timestamps = timestamps.unwrap_or_else(|| {
        // Point-only configurations take the grid from the stored state.
        states
            .iter()
            .zip(&cfg.constituents)
            .find(|(_, c)| matches!(c.model, ConstituentModel::Svr(_)))
            .map(|(s, _)| {
                let have = s.timestamps.len();
                s.timestamps[have - window_days * STEPS_PER_DAY..].to_vec()
            })
            .unwrap_or_default()
    });
    Ok((surfaces, points, timestamps))
}
