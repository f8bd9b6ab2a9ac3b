//! Forecast verification: pinball, CRPS, PICP with consistency bars,
//! Diebold–Mariano and Kupiec tests, and distribution summary statistics.

use alloc::vec::Vec;

use crate::cdf::PredictiveCdf;
use crate::quantile::QuantileSurface;
use crate::time::STEPS_PER_DAY;
use crate::{Error, Result};

/// Pinball (quantile) loss; its expectation is minimised by the true
/// conditional `q`-quantile.
pub fn pinball(y: f64, pred: f64, q: f64) -> f64 {
    crate::qr::pinball_loss(y, pred, q)
}

/// Mean pinball over aligned series, skipping missing observations.
pub fn mean_pinball(obs: &[f64], preds: &[f64], q: f64) -> Result<f64> {
    if obs.len() != preds.len() {
        return Err(Error::DimensionMismatch("pinball series lengths".into()));
    }
    let mut acc = 0.0;
    let mut n = 0usize;
    for (&y, &p) in obs.iter().zip(preds) {
        if y.is_finite() && p.is_finite() {
            acc += pinball(y, p, q);
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::invalid("no finite observation/prediction pairs"));
    }
    Ok(acc / n as f64)
}

/// CRPS of a nine-quantile predictive CDF against one observation.
pub fn crps(cdf: &PredictiveCdf, y: f64) -> f64 {
    cdf.crps(y)
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / core::f64::consts::SQRT_2)
}

/// Nominal central prediction intervals expressible with the nine levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictionInterval {
    P50,
    P80,
    P90,
    P95,
}

impl PredictionInterval {
    pub fn nominal(self) -> f64 {
        match self {
            PredictionInterval::P50 => 0.50,
            PredictionInterval::P80 => 0.80,
            PredictionInterval::P90 => 0.90,
            PredictionInterval::P95 => 0.95,
        }
    }

    /// Bounding quantile levels centred on the median.
    pub fn bounds(self) -> (f64, f64) {
        match self {
            PredictionInterval::P50 => (0.25, 0.75),
            PredictionInterval::P80 => (0.10, 0.90),
            PredictionInterval::P90 => (0.05, 0.95),
            PredictionInterval::P95 => (0.025, 0.975),
        }
    }

    pub const ALL: [PredictionInterval; 4] = [
        PredictionInterval::P50,
        PredictionInterval::P80,
        PredictionInterval::P90,
        PredictionInterval::P95,
    ];

    pub fn label(self) -> &'static str {
        match self {
            PredictionInterval::P50 => "50%",
            PredictionInterval::P80 => "80%",
            PredictionInterval::P90 => "90%",
            PredictionInterval::P95 => "95%",
        }
    }
}

/// Coverage counts; rates derive from exact integer counts so the per-period
/// breakdown recombines to the aggregate identically.
#[derive(Debug, Clone, PartialEq)]
pub struct PicpResult {
    pub covered: usize,
    pub total: usize,
    /// Per dispatch period (1..=288): (covered, total).
    pub per_period: Vec<(usize, usize)>,
}

impl PicpResult {
    pub fn rate(&self) -> f64 {
        self.covered as f64 / self.total as f64
    }

    pub fn period_rate(&self, period_idx: usize) -> Option<f64> {
        let (c, t) = self.per_period[period_idx];
        (t > 0).then(|| c as f64 / t as f64)
    }
}

/// Empirical coverage of a central prediction interval, with the
/// per-dispatch-period breakdown.
pub fn picp(
    surface: &QuantileSurface,
    observations: &[f64],
    interval: PredictionInterval,
) -> Result<PicpResult> {
    if observations.len() != surface.n_rows() {
        return Err(Error::DimensionMismatch("observations vs surface rows".into()));
    }
    let (lo_level, hi_level) = interval.bounds();
    let lo = surface
        .level_index(lo_level)
        .ok_or_else(|| Error::invalid(alloc::format!("surface lacks level {lo_level}")))?;
    let hi = surface
        .level_index(hi_level)
        .ok_or_else(|| Error::invalid(alloc::format!("surface lacks level {hi_level}")))?;
    let mut covered = 0usize;
    let mut total = 0usize;
    let mut per_period = alloc::vec![(0usize, 0usize); STEPS_PER_DAY];
    for (i, &y) in observations.iter().enumerate() {
        if !y.is_finite() {
            continue;
        }
        let row = surface.row(i);
        let inside = row[lo] <= y && y <= row[hi];
        let period = surface.timestamps()[i].interval_index() - 1;
        total += 1;
        per_period[period].1 += 1;
        if inside {
            covered += 1;
            per_period[period].0 += 1;
        }
    }
    if total == 0 {
        return Err(Error::invalid("no finite observations"));
    }
    Ok(PicpResult {
        covered,
        total,
        per_period,
    })
}

/// Binomial consistency bars around nominal coverage `p` for `n` samples:
/// `p ± 1.96 sqrt(p(1-p)/n)` (the rate form of `np ± 1.96 sqrt(np(1-p))`).
pub fn consistency_bars(n: usize, p: f64) -> (f64, f64) {
    let half = 1.96 * libm::sqrt(p * (1.0 - p) / n as f64);
    (p - half, p + half)
}

/// Diebold–Mariano comparison of two loss series.
#[derive(Debug, Clone, PartialEq)]
pub struct DmResult {
    /// Positive when the first loss series is larger (second model superior).
    pub statistic: f64,
    /// One-sided p-value for "the second model is more accurate".
    pub p_one_sided: f64,
    /// The long-run variance collapsed and was floored.
    pub variance_floored: bool,
}

/// Diebold–Mariano test on the loss differential `d = loss_a - loss_b`, with
/// a Bartlett/Newey–West long-run variance at lag `floor(n^(1/3))` (5-minute
/// losses are serially correlated).
pub fn diebold_mariano(loss_a: &[f64], loss_b: &[f64]) -> Result<DmResult> {
    if loss_a.len() != loss_b.len() {
        return Err(Error::DimensionMismatch("loss series lengths".into()));
    }
    let n = loss_a.len();
    if n < 30 {
        return Err(Error::InsufficientHistory {
            required: 30,
            available: n,
        });
    }
    let d: Vec<f64> = loss_a.iter().zip(loss_b).map(|(a, b)| a - b).collect();
    let mean = d.iter().sum::<f64>() / n as f64;
    let lag = libm::floor(libm::pow(n as f64, 1.0 / 3.0)) as usize;
    let gamma = |l: usize| -> f64 {
        let mut acc = 0.0;
        for t in l..n {
            acc += (d[t] - mean) * (d[t - l] - mean);
        }
        acc / n as f64
    };
    let mut lrv = gamma(0);
    for l in 1..=lag {
        lrv += 2.0 * (1.0 - l as f64 / (lag as f64 + 1.0)) * gamma(l);
    }
    let mut floored = false;
    let scale = d.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
    if lrv <= 1e-16 * scale * scale {
        if mean.abs() <= 1e-16 * scale {
            return Ok(DmResult {
                statistic: 0.0,
                p_one_sided: 0.5,
                variance_floored: false,
            });
        }
        lrv = 1e-16 * scale * scale;
        floored = true;
    }
    let statistic = mean / libm::sqrt(lrv / n as f64);
    Ok(DmResult {
        statistic,
        p_one_sided: 1.0 - normal_cdf(statistic),
        variance_floored: floored,
    })
}

/// Kupiec proportion-of-failures likelihood ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct KupiecResult {
    pub lr: f64,
    /// Chi-squared (1 dof) p-value.
    pub p_value: f64,
}

/// Unconditional coverage test: `n1` violations out of `n` at nominal
/// violation probability `p`, with `0 ln 0 := 0`.
pub fn kupiec_pof(n1: usize, n: usize, p: f64) -> Result<KupiecResult> {
    if n1 > n || n == 0 {
        return Err(Error::invalid("need 0 <= n1 <= n, n > 0"));
    }
    if !(0.0 < p && p < 1.0) {
        return Err(Error::invalid("nominal probability must lie in (0, 1)"));
    }
    let n0 = (n - n1) as f64;
    let n1f = n1 as f64;
    let nf = n as f64;
    // LR = -2 ln[ (1-p)^n0 p^n1 / ((1-pi)^n0 pi^n1) ], grouped per ratio so
    // that pi == p cancels exactly (0 ln 0 := 0 via the zero-count guard).
    let pi = n1f / nf;
    let xlnr = |count: f64, num: f64, den: f64| {
        if count == 0.0 {
            0.0
        } else {
            count * libm::log(num / den)
        }
    };
    let lr = 2.0 * (xlnr(n0, 1.0 - pi, 1.0 - p) + xlnr(n1f, pi, p));
    let lr = lr.max(0.0);
    // chi^2_1 survival function.
    let p_value = libm::erfc(libm::sqrt(lr / 2.0));
    Ok(KupiecResult { lr, p_value })
}

/// Moment conventions: sample SD uses n-1; skew is m3/m2^1.5; kurtosis is
/// non-excess m4/m2^2 (normal = 3); MAD is median-centred.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryStats {
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub sd: f64,
    pub mad: f64,
    pub skew: f64,
    pub kurtosis: f64,
}

/// Distribution summary of a series (missing entries skipped).
pub fn summary_stats(series: &[f64]) -> Result<SummaryStats> {
    let values: Vec<f64> = series.iter().copied().filter(|v| v.is_finite()).collect();
    let n = values.len();
    if n < 2 {
        return Err(Error::InsufficientHistory {
            required: 2,
            available: n,
        });
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let mut sorted = values.clone();
    sorted.sort_by(f64::total_cmp);
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    for &v in &values {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let sd = libm::sqrt(m2 / (nf - 1.0));
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    let mut dev: Vec<f64> = values.iter().map(|v| (v - median).abs()).collect();
    dev.sort_by(f64::total_cmp);
    let mad = if n % 2 == 1 {
        dev[n / 2]
    } else {
        0.5 * (dev[n / 2 - 1] + dev[n / 2])
    };
    let skew = if m2 > 0.0 { m3 / libm::pow(m2, 1.5) } else { 0.0 };
    let kurtosis = if m2 > 0.0 { m4 / (m2 * m2) } else { 0.0 };
    Ok(SummaryStats {
        n,
        mean,
        median,
        sd,
        mad,
        skew,
        kurtosis,
    })
}

/// Mean and median absolute error of a point forecast.
#[derive(Debug, Clone, PartialEq)]
pub struct AbsErrorStats {
    pub mean_ae: f64,
    pub median_ae: f64,
    pub n: usize,
}

pub fn abs_error_stats(forecasts: &[f64], observations: &[f64]) -> Result<AbsErrorStats> {
    if forecasts.len() != observations.len() {
        return Err(Error::DimensionMismatch("forecast vs observation lengths".into()));
    }
    let mut errs: Vec<f64> = forecasts
        .iter()
        .zip(observations)
        .filter(|(f, o)| f.is_finite() && o.is_finite())
        .map(|(f, o)| (f - o).abs())
        .collect();
    if errs.is_empty() {
        return Err(Error::invalid("no finite forecast/observation pairs"));
    }
    let mean_ae = errs.iter().sum::<f64>() / errs.len() as f64;
    errs.sort_by(f64::total_cmp);
    let n = errs.len();
    let median_ae = if n % 2 == 1 {
        errs[n / 2]
    } else {
        0.5 * (errs[n / 2 - 1] + errs[n / 2])
    };
    Ok(AbsErrorStats {
        mean_ae,
        median_ae,
        n,
    })
}
