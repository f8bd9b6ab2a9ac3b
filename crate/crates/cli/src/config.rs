//! Run configuration: a key/value TOML file mapped onto the core configs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use nemcast_core::backtest::{BacktestConfig, ConstituentConfig, ConstituentModel};
use nemcast_core::battery::BatteryParams;
use nemcast_core::ensemble::EnsembleKind;
use nemcast_core::features::FeatureConfig;
use nemcast_core::forest::ForestHyperparams;
use nemcast_core::quantile::NINE_LEVELS;
use nemcast_core::spike::SpikeConfig;
use nemcast_core::svr::SvrParams;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataSection,
    #[serde(default)]
    pub quantiles: QuantileSection,
    #[serde(default)]
    pub spike: SpikeSection,
    #[serde(default)]
    pub features: FeatureSection,
    #[serde(default, rename = "constituent")]
    pub constituents: Vec<ConstituentSection>,
    #[serde(default)]
    pub postprocess: PostprocessSection,
    #[serde(default)]
    pub ensemble: EnsembleSection,
    #[serde(default)]
    pub economic: EconomicSection,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub price_csv: PathBuf,
    #[serde(default)]
    pub weather_csv: Option<PathBuf>,
    #[serde(default = "default_region")]
    pub region: String,
    /// Largest run of missing 5-minute intervals tolerated at load time.
    #[serde(default = "default_max_gap")]
    pub max_gap_steps: usize,
    /// Forward-fill limit for weather gaps, in grid steps (6 h default).
    #[serde(default = "default_weather_ffill")]
    pub weather_ffill_steps: usize,
}

fn default_region() -> String {
    "SA".into()
}
fn default_max_gap() -> usize {
    12
}
fn default_weather_ffill() -> usize {
    72
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantileSection {
    pub levels: Vec<f64>,
}

impl Default for QuantileSection {
    fn default() -> Self {
        QuantileSection {
            levels: NINE_LEVELS.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpikeSection {
    pub annual_days: u32,
    pub monthly_days: u32,
    pub upper_level: f64,
    pub lower_level: f64,
    pub thresholds_from_imputed: bool,
}

impl Default for SpikeSection {
    fn default() -> Self {
        let d = SpikeConfig::default();
        SpikeSection {
            annual_days: d.annual_days,
            monthly_days: d.monthly_days,
            upper_level: d.upper_level,
            lower_level: d.lower_level,
            thresholds_from_imputed: d.thresholds_from_imputed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FeatureSection {
    pub weather: bool,
}

impl Default for FeatureSection {
    fn default() -> Self {
        FeatureSection { weather: true }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstituentSection {
    pub name: String,
    /// One of `linear_qr`, `qrf`, `svr`.
    pub model: String,
    pub window_days: u32,
    // Forest overrides.
    #[serde(default)]
    pub n_trees: Option<usize>,
    #[serde(default)]
    pub min_leaf: Option<usize>,
    #[serde(default)]
    pub mtry: Option<usize>,
    #[serde(default)]
    pub bootstrap: Option<bool>,
    // SVR overrides.
    #[serde(default)]
    pub c: Option<f64>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PostprocessSection {
    pub smoothing_order: usize,
    pub ar_order: usize,
}

impl Default for PostprocessSection {
    fn default() -> Self {
        PostprocessSection {
            smoothing_order: 12,
            ar_order: 2,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleSection {
    pub kinds: Vec<String>,
    pub window_days: u32,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        EnsembleSection {
            kinds: vec!["qra".into(), "qqra".into()],
            window_days: 35,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EconomicSection {
    pub round_trip_eff: f64,
    pub e_min_kwh: f64,
    pub e_max_kwh: f64,
    pub e_init_kwh: f64,
    pub p_max_kw: f64,
    pub dt_hours: f64,
    pub network_charge: f64,
    pub n_price_samples: usize,
    pub milp_gap: f64,
    pub milp_max_nodes: u64,
}

impl Default for EconomicSection {
    fn default() -> Self {
        let d = BatteryParams::default();
        EconomicSection {
            round_trip_eff: d.round_trip_eff,
            e_min_kwh: d.e_min_kwh,
            e_max_kwh: d.e_max_kwh,
            e_init_kwh: d.e_init_kwh,
            p_max_kw: d.p_max_kw,
            dt_hours: d.dt_hours,
            network_charge: d.network_charge,
            n_price_samples: 100,
            milp_gap: 1e-6,
            milp_max_nodes: 2_000_000,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::validation(format!("cannot read config {path:?}: {e}")))?;
        let cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| CliError::validation(format!("config {path:?}: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        for c in &self.constituents {
            if !matches!(c.model.as_str(), "linear_qr" | "qrf" | "svr") {
                return Err(CliError::validation(format!(
                    "constituent {}: unknown model {:?} (expected linear_qr, qrf or svr)",
                    c.name, c.model
                )));
            }
        }
        for k in &self.ensemble.kinds {
            if !matches!(k.as_str(), "qra" | "qqra") {
                return Err(CliError::validation(format!(
                    "unknown ensemble kind {k:?} (expected qra or qqra)"
                )));
            }
        }
        Ok(())
    }

    /// The paper's constituent set, used when the config lists none.
    fn default_constituents() -> Vec<ConstituentConfig> {
        BacktestConfig::default().constituents
    }

    pub fn spike_config(&self) -> SpikeConfig {
        SpikeConfig {
            annual_days: self.spike.annual_days,
            monthly_days: self.spike.monthly_days,
            upper_level: self.spike.upper_level,
            lower_level: self.spike.lower_level,
            thresholds_from_imputed: self.spike.thresholds_from_imputed,
        }
    }

    pub fn battery_params(&self) -> BatteryParams {
        BatteryParams {
            round_trip_eff: self.economic.round_trip_eff,
            e_min_kwh: self.economic.e_min_kwh,
            e_max_kwh: self.economic.e_max_kwh,
            e_init_kwh: self.economic.e_init_kwh,
            p_max_kw: self.economic.p_max_kw,
            dt_hours: self.economic.dt_hours,
            network_charge: self.economic.network_charge,
        }
    }

    /// Assemble the core backtest configuration, applying a seed override.
    pub fn backtest_config(&self, seed_override: Option<u64>) -> Result<BacktestConfig> {
        let constituents = if self.constituents.is_empty() {
            Self::default_constituents()
        } else {
            self.constituents
                .iter()
                .map(|c| {
                    let model = match c.model.as_str() {
                        "linear_qr" => ConstituentModel::LinearQr,
                        "qrf" => {
                            let d = ForestHyperparams::default();
                            ConstituentModel::Forest(ForestHyperparams {
                                n_trees: c.n_trees.unwrap_or(d.n_trees),
                                min_leaf: c.min_leaf.unwrap_or(d.min_leaf),
                                mtry: c.mtry.or(d.mtry),
                                bootstrap: c.bootstrap.unwrap_or(d.bootstrap),
                                max_depth: None,
                            })
                        }
                        "svr" => {
                            let d = SvrParams::default();
                            ConstituentModel::Svr(SvrParams {
                                c: c.c.unwrap_or(d.c),
                                epsilon: c.epsilon.unwrap_or(d.epsilon),
                                gamma: c.gamma.or(d.gamma),
                                tol: c.tol.unwrap_or(d.tol),
                                ..d
                            })
                        }
                        _ => unreachable!("validated"),
                    };
                    ConstituentConfig {
                        name: c.name.clone(),
                        model,
                        window_days: c.window_days,
                    }
                })
                .collect()
        };
        let ensembles = self
            .ensemble
            .kinds
            .iter()
            .map(|k| match k.as_str() {
                "qra" => EnsembleKind::Qra,
                _ => EnsembleKind::QQra,
            })
            .collect();
        Ok(BacktestConfig {
            levels: self.quantiles.levels.clone(),
            constituents,
            spike: self.spike_config(),
            features: FeatureConfig {
                weather: self.features.weather,
            },
            smoothing_order: self.postprocess.smoothing_order,
            ar_order: self.postprocess.ar_order,
            ensemble_days: self.ensemble.window_days,
            ensembles,
            seed: seed_override.unwrap_or(self.seed),
        })
    }

    /// Canonical serialized form, hashed into artifact manifests.
    pub fn canonical_toml(&self, seed_override: Option<u64>) -> String {
        let mut copy = self.clone();
        if let Some(s) = seed_override {
            copy.seed = s;
        }
        toml::to_string_pretty(&copy).expect("config serializes")
    }
}

/// FNV-1a hash of the canonical config text.
pub fn config_hash(canonical: &str) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in canonical.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}
