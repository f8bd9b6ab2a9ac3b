//! Post-processing of constituent forecasts: centred moving-average smoothing
//! followed by an autoregressive vertical shift of the whole predicted
//! density.
//!
//! Smoothing damps the oscillatory behaviour volatile training data induces,
//! particularly in outer forest quantiles. The AR step then re-centres each
//! day's predictions using the information the 24-hour-lagged base models
//! cannot see: the most recent residuals between observations and the
//! post-smoothing median.

use alloc::vec::Vec;

use crate::quantile::QuantileSurface;
use crate::{Error, Result};

/// Smooth one series with the classic `2 x order` centred moving average:
/// `order + 1` taps, the two end taps at half weight. Edges truncate the
/// window and renormalise the weights.
pub fn smooth_series(values: &[f64], order: usize) -> Result<Vec<f64>> {
    if order < 2 || order % 2 != 0 {
        return Err(Error::invalid("smoothing order must be even and >= 2"));
    }
    let half = (order / 2) as isize;
    let n = values.len() as isize;
    let mut out = Vec::with_capacity(values.len());
    for t in 0..n {
        let mut acc = 0.0;
        let mut weight = 0.0;
        for k in -half..=half {
            let idx = t + k;
            if idx < 0 || idx >= n {
                continue;
            }
            let w = if k.unsigned_abs() as usize == order / 2 {
                1.0 / (2.0 * order as f64)
            } else {
                1.0 / order as f64
            };
            let v = values[idx as usize];
            if v.is_finite() {
                acc += w * v;
                weight += w;
            }
        }
        out.push(if weight > 0.0 { acc / weight } else { f64::NAN });
    }
    Ok(out)
}

/// Smooth every level of a surface independently.
pub fn smooth_surface(surface: &QuantileSurface, order: usize) -> Result<QuantileSurface> {
    let mut out = surface.clone();
    for l in 0..surface.levels().len() {
        let smoothed = smooth_series(&surface.level_series(l), order)?;
        out.set_level_series(l, &smoothed)?;
    }
    Ok(out)
}

/// Zero-mean autoregressive model of the residual series.
#[derive(Debug, Clone, PartialEq)]
pub struct ArModel {
    pub order: usize,
    pub coefficients: Vec<f64>,
}

impl ArModel {
    /// All characteristic roots strictly inside the unit circle (Schur–Cohn
    /// reduction); stable models give forecasts that decay to zero.
    pub fn is_stable(&self) -> bool {
        // Characteristic polynomial z^p - phi_1 z^(p-1) - ... - phi_p.
        let mut c: Vec<f64> = Vec::with_capacity(self.order + 1);
        c.push(1.0);
        for phi in &self.coefficients {
            c.push(-phi);
        }
        let mut n = c.len() - 1;
        while n > 0 {
            let k = c[n] / c[0];
            if k.abs() >= 1.0 {
                return false;
            }
            let mut next = Vec::with_capacity(n);
            for i in 0..n {
                next.push(c[i] - k * c[n - i]);
            }
            c = next;
            n -= 1;
        }
        true
    }

    /// Recursive forecast for horizons `1..=horizon`, anchored on the last
    /// `order` residuals (oldest first).
    pub fn forecast(&self, anchor: &[f64], horizon: usize) -> Result<Vec<f64>> {
        if anchor.len() < self.order {
            return Err(Error::InsufficientHistory {
                required: self.order,
                available: anchor.len(),
            });
        }
        let mut history: Vec<f64> = anchor[anchor.len() - self.order..].to_vec();
        let mut out = Vec::with_capacity(horizon);
        for _ in 0..horizon {
            let mut eps = 0.0;
            for (j, phi) in self.coefficients.iter().enumerate() {
                eps += phi * history[history.len() - 1 - j];
            }
            out.push(eps);
            history.push(eps);
        }
        Ok(out)
    }
}

/// Least-squares fit of `eps_t` on its `p` lags, no intercept.
pub fn fit_ar_residual(residuals: &[f64], p: usize) -> Result<ArModel> {
    if p == 0 {
        return Err(Error::invalid("AR order must be positive"));
    }
    if residuals.len() < 10 * p {
        return Err(Error::InsufficientHistory {
            required: 10 * p,
            available: residuals.len(),
        });
    }
    // Normal equations over rows with complete lag windows.
    let mut g = alloc::vec![0.0f64; p * p];
    let mut rhs = alloc::vec![0.0f64; p];
    let mut used = 0usize;
    let mut magnitude = 0.0f64;
    for t in p..residuals.len() {
        let target = residuals[t];
        if !target.is_finite() || (1..=p).any(|j| !residuals[t - j].is_finite()) {
            continue;
        }
        used += 1;
        magnitude = magnitude.max(target.abs());
        for j in 0..p {
            let xj = residuals[t - 1 - j];
            magnitude = magnitude.max(xj.abs());
            rhs[j] += xj * target;
            for k in 0..p {
                g[j * p + k] += xj * residuals[t - 1 - k];
            }
        }
    }
    if used < 10 * p {
        return Err(Error::InsufficientHistory {
            required: 10 * p,
            available: used,
        });
    }
    if magnitude == 0.0 {
        // Identically zero residuals carry no signal.
        return Ok(ArModel {
            order: p,
            coefficients: alloc::vec![0.0; p],
        });
    }

    // Gaussian elimination with partial pivoting.
    let mut a = g;
    let mut b = rhs;
    let scale = a.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    for col in 0..p {
        let mut piv = col;
        for r in col + 1..p {
            if a[r * p + col].abs() > a[piv * p + col].abs() {
                piv = r;
            }
        }
        if a[piv * p + col].abs() <= 1e-12 * scale.max(1.0) {
            return Err(Error::Singular(alloc::format!(
                "AR normal equations are singular; try an order below {p}"
            )));
        }
        if piv != col {
            for k in 0..p {
                a.swap(col * p + k, piv * p + k);
            }
            b.swap(col, piv);
        }
        for r in col + 1..p {
            let f = a[r * p + col] / a[col * p + col];
            if f != 0.0 {
                for k in col..p {
                    a[r * p + k] -= f * a[col * p + k];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut phi = alloc::vec![0.0f64; p];
    for col in (0..p).rev() {
        let mut acc = b[col];
        for k in col + 1..p {
            acc -= a[col * p + k] * phi[k];
        }
        phi[col] = acc / a[col * p + col];
    }
    Ok(ArModel {
        order: p,
        coefficients: phi,
    })
}

/// A shifted surface plus the applied shift path.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedSurface {
    pub surface: QuantileSurface,
    pub shifts: Vec<f64>,
    /// The fitted AR model had spectral radius >= 1; the shift was still
    /// applied as computed.
    pub unstable: bool,
}

/// Vertically shift all levels of the smoothed surface by the recursive AR
/// residual forecast. Every level at a timestamp moves by the same amount, so
/// quantile spacing is preserved exactly.
pub fn shift_quantiles(
    surface: &QuantileSurface,
    ar: &ArModel,
    anchor: &[f64],
) -> Result<ShiftedSurface> {
    let shifts = ar.forecast(anchor, surface.n_rows())?;
    let mut shifted = surface.clone();
    for (i, s) in shifts.iter().enumerate() {
        for v in shifted.row_mut(i) {
            *v += s;
        }
    }
    Ok(ShiftedSurface {
        surface: shifted,
        shifts,
        unstable: !ar.is_stable(),
    })
}
