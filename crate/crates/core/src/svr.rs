//! Epsilon-insensitive support vector regression with an RBF kernel, solved
//! by sequential minimal optimisation on the standard 2n-variable dual.
//!
//! Working pairs are chosen by maximal KKT violation with the second-order
//! heuristic, ties broken by index, so fits are deterministic.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use crate::{Error, Result};

/// SVR hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvrParams {
    pub c: f64,
    pub epsilon: f64,
    /// RBF width on standardized inputs; `None` means `1 / width`.
    pub gamma: Option<f64>,
    /// KKT gap tolerance.
    pub tol: f64,
    pub max_iters: usize,
    /// Kept for reproducibility bookkeeping; pair selection is deterministic.
    pub seed: u64,
}

impl Default for SvrParams {
    fn default() -> Self {
        SvrParams {
            c: 10.0,
            epsilon: 1.0,
            gamma: None,
            tol: 1e-3,
            max_iters: 400_000,
            seed: 0,
        }
    }
}

/// Fitted model: support vectors live in standardized feature space.
#[derive(Debug, Clone, PartialEq)]
pub struct SvrModel {
    pub params: SvrParams,
    pub gamma: f64,
    pub bias: f64,
    /// `(standardized support vector, alpha_i - alpha_i*)` pairs.
    pub support: Vec<(Vec<f64>, f64)>,
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    pub width: usize,
    /// Final KKT gap.
    pub kkt_gap: f64,
    pub iterations: usize,
}

/// RBF kernel on already standardized inputs.
pub fn rbf_kernel(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let mut dist = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        dist += d * d;
    }
    libm::exp(-gamma * dist)
}

/// Lazily computed kernel rows with FIFO eviction.
struct KernelCache {
    x: Vec<f64>, // standardized, row-major n x width
    width: usize,
    gamma: f64,
    rows: Vec<Option<Vec<f64>>>,
    queue: VecDeque<usize>,
    max_rows: usize,
}

impl KernelCache {
    fn new(x: Vec<f64>, width: usize, gamma: f64, n: usize) -> Self {
        // ~256 MB ceiling keeps year-long windows tractable.
        let max_rows = (256 * 1024 * 1024 / (8 * n.max(1))).clamp(8, n.max(8));
        KernelCache {
            x,
            width,
            gamma,
            rows: alloc::vec![None; n],
            queue: VecDeque::new(),
            max_rows,
        }
    }

    fn point(&self, i: usize) -> &[f64] {
        &self.x[i * self.width..(i + 1) * self.width]
    }

    fn row(&mut self, i: usize) -> &[f64] {
        if self.rows[i].is_none() {
            let n = self.rows.len();
            let mut row = Vec::with_capacity(n);
            for j in 0..n {
                row.push(rbf_kernel(self.point(i), self.point(j), self.gamma));
            }
            if self.queue.len() >= self.max_rows {
                if let Some(old) = self.queue.pop_front() {
                    self.rows[old] = None;
                }
            }
            self.queue.push_back(i);
            self.rows[i] = Some(row);
        }
        self.rows[i].as_ref().unwrap().as_slice()
    }
}

/// Fit by SMO. Features are standardized internally; zero-variance columns
/// pass through unscaled.
pub fn fit_svr(rows: &[f64], width: usize, y: &[f64], params: &SvrParams) -> Result<SvrModel> {
    let n = y.len();
    if width == 0 || rows.len() != n * width {
        return Err(Error::DimensionMismatch(alloc::format!(
            "matrix of {} entries does not factor as {n} x {width}",
            rows.len()
        )));
    }
    if n < 2 {
        return Err(Error::InsufficientHistory {
            required: 2,
            available: n,
        });
    }
    if params.c <= 0.0 || params.epsilon <= 0.0 || params.tol <= 0.0 {
        return Err(Error::invalid("C, epsilon and tol must be positive"));
    }
    let gamma = match params.gamma {
        Some(g) if g > 0.0 => g,
        Some(_) => return Err(Error::invalid("gamma must be positive")),
        None => 1.0 / width as f64,
    };

    // Standardize features.
    let mut means = alloc::vec![0.0f64; width];
    let mut scales = alloc::vec![0.0f64; width];
    for i in 0..n {
        for j in 0..width {
            means[j] += rows[i * width + j];
        }
    }
    for m in means.iter_mut() {
        *m /= n as f64;
    }
    for i in 0..n {
        for j in 0..width {
            let d = rows[i * width + j] - means[j];
            scales[j] += d * d;
        }
    }
    for s in scales.iter_mut() {
        *s = libm::sqrt(*s / n as f64);
        if *s == 0.0 {
            *s = 1.0;
        }
    }
    let mut x = alloc::vec![0.0f64; n * width];
    for i in 0..n {
        for j in 0..width {
            x[i * width + j] = (rows[i * width + j] - means[j]) / scales[j];
        }
    }

    let mut cache = KernelCache::new(x, width, gamma, n);
    let c = params.c;
    let eps = params.epsilon;
    // Combined variables: u < n are alpha (sign +1), u >= n are alpha* (-1).
    let sign = |u: usize| if u < n { 1.0 } else { -1.0 };
    let mut z = alloc::vec![0.0f64; 2 * n];
    // At z = 0 the gradient is just the linear term.
    let mut grad = alloc::vec![0.0f64; 2 * n];
    for i in 0..n {
        grad[i] = eps - y[i];
        grad[n + i] = eps + y[i];
    }

    let mut iterations = 0usize;
    let gap = loop {
        // I_up: can move in the +constraint direction; I_low: the opposite.
        let mut m_up = f64::NEG_INFINITY;
        let mut i_up = usize::MAX;
        for u in 0..2 * n {
            let in_up = if sign(u) > 0.0 { z[u] < c } else { z[u] > 0.0 };
            if in_up {
                let v = -sign(u) * grad[u];
                if v > m_up {
                    m_up = v;
                    i_up = u;
                }
            }
        }
        let mut m_low = f64::INFINITY;
        for u in 0..2 * n {
            let in_low = if sign(u) > 0.0 { z[u] > 0.0 } else { z[u] < c };
            if in_low {
                let v = -sign(u) * grad[u];
                if v < m_low {
                    m_low = v;
                }
            }
        }
        let gap = m_up - m_low;
        if gap <= params.tol {
            break gap;
        }
        if iterations >= params.max_iters {
            return Err(Error::NonConvergence(gap));
        }

        // Second-order choice of j among sufficiently violating candidates.
        let i = i_up;
        let (pi, si) = (i % n, sign(i));
        let row_i: Vec<f64> = cache.row(pi).to_vec();
        let kii = row_i[pi];
        let mut best_j = usize::MAX;
        let mut best_score = 0.0f64;
        for u in 0..2 * n {
            let in_low = if sign(u) > 0.0 { z[u] > 0.0 } else { z[u] < c };
            if !in_low {
                continue;
            }
            let b_u = m_up + sign(u) * grad[u];
            if b_u <= params.tol * 0.5 {
                continue;
            }
            let (pu, su) = (u % n, sign(u));
            let quad = kii + cache.row(pu)[pu] - 2.0 * si * su * row_i[pu];
            let quad = if quad > 1e-12 { quad } else { 1e-12 };
            let score = -(b_u * b_u) / quad;
            if score < best_score {
                best_score = score;
                best_j = u;
            }
        }
        if best_j == usize::MAX {
            break gap;
        }
        let j = best_j;
        let (pj, sj) = (j % n, sign(j));
        let row_j: Vec<f64> = cache.row(pj).to_vec();
        let kjj = row_j[pj];
        let kij = row_i[pj];

        let (old_i, old_j) = (z[i], z[j]);
        if si != sj {
            let quad = (kii + kjj + 2.0 * kij).max(1e-12);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = z[i] - z[j];
            z[i] += delta;
            z[j] += delta;
            if diff > 0.0 {
                if z[j] < 0.0 {
                    z[j] = 0.0;
                    z[i] = diff;
                }
                if z[i] > c {
                    z[i] = c;
                    z[j] = c - diff;
                }
            } else {
                if z[i] < 0.0 {
                    z[i] = 0.0;
                    z[j] = -diff;
                }
                if z[j] > c {
                    z[j] = c;
                    z[i] = c + diff;
                }
            }
        } else {
            let quad = (kii + kjj - 2.0 * kij).max(1e-12);
            let delta = (grad[i] - grad[j]) / quad;
            let total = z[i] + z[j];
            z[i] -= delta;
            z[j] += delta;
            if z[i] < 0.0 {
                z[i] = 0.0;
                z[j] = total;
            }
            if z[j] < 0.0 {
                z[j] = 0.0;
                z[i] = total;
            }
            if z[i] > c {
                z[i] = c;
                z[j] = total - c;
            }
            if z[j] > c {
                z[j] = c;
                z[i] = total - c;
            }
        }
        let (di, dj) = (z[i] - old_i, z[j] - old_j);
        if di != 0.0 || dj != 0.0 {
            for u in 0..2 * n {
                let pu = u % n;
                let su = sign(u);
                grad[u] += su * si * row_i[pu] * di + su * sj * row_j[pu] * dj;
            }
        }
        iterations += 1;
    };

    // Bias: average s*grad over free variables, else the gap midpoint.
    let mut free_sum = 0.0;
    let mut free_count = 0usize;
    for u in 0..2 * n {
        if z[u] > 0.0 && z[u] < c {
            free_sum += -sign(u) * grad[u];
            free_count += 1;
        }
    }
    let bias = if free_count > 0 {
        free_sum / free_count as f64
    } else {
        let mut m_up = f64::NEG_INFINITY;
        let mut m_low = f64::INFINITY;
        for u in 0..2 * n {
            let v = -sign(u) * grad[u];
            let in_up = if sign(u) > 0.0 { z[u] < c } else { z[u] > 0.0 };
            let in_low = if sign(u) > 0.0 { z[u] > 0.0 } else { z[u] < c };
            if in_up {
                m_up = m_up.max(v);
            }
            if in_low {
                m_low = m_low.min(v);
            }
        }
        (m_up + m_low) / 2.0
    };

    let mut support = Vec::new();
    for i in 0..n {
        let beta = z[i] - z[n + i];
        if beta != 0.0 {
            support.push((cache.point(i).to_vec(), beta));
        }
    }
    Ok(SvrModel {
        params: *params,
        gamma,
        bias,
        support,
        means,
        scales,
        width,
        kkt_gap: gap,
        iterations,
    })
}

/// Kernel expansion over the support set.
pub fn predict_svr(model: &SvrModel, rows: &[f64], width: usize) -> Result<Vec<f64>> {
    if width != model.width {
        return Err(Error::DimensionMismatch(alloc::format!(
            "prediction width {width} vs training width {}",
            model.width
        )));
    }
    if rows.len() % width != 0 {
        return Err(Error::DimensionMismatch("ragged prediction matrix".into()));
    }
    let mut std_buf = alloc::vec![0.0f64; width];
    Ok(rows
        .chunks_exact(width)
        .map(|row| {
            for j in 0..width {
                std_buf[j] = (row[j] - model.means[j]) / model.scales[j];
            }
            let mut acc = model.bias;
            for (sv, beta) in &model.support {
                acc += beta * rbf_kernel(sv, &std_buf, model.gamma);
            }
            acc
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kernel_at_identical_points_is_one() {
        let x = [0.3, -2.0, 5.5];
        assert_eq!(rbf_kernel(&x, &x, 0.7), 1.0);
    }

    #[test]
    fn constant_targets_stay_inside_the_tube() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 25;
        let rows: Vec<f64> = (0..n * 2).map(|_| rng.random_range(-3.0..3.0)).collect();
        let y = vec![7.25; n];
        let model = fit_svr(&rows, 2, &y, &SvrParams::default()).unwrap();
        assert!(model.support.is_empty());
        assert!((model.bias - 7.25).abs() < 1e-12);
        let preds = predict_svr(&model, &rows, 2).unwrap();
        assert!(preds.iter().all(|p| (p - 7.25).abs() < 1e-12));
    }

    fn toy_problem(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::with_capacity(n * 2);
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            let a = rng.random_range(-2.0..2.0);
            let b = rng.random_range(-2.0..2.0);
            rows.extend_from_slice(&[a, b]);
            y.push(libm::sin(a) + 0.5 * b * b + rng.random_range(-0.1..0.1));
        }
        (rows, y)
    }

    /// Dual objective 0.5 z'Qz + p'z for the combined variable vector.
    fn dual_objective(z: &[f64], k: &[Vec<f64>], y: &[f64], eps: f64) -> f64 {
        let n = y.len();
        let beta: Vec<f64> = (0..n).map(|i| z[i] - z[n + i]).collect();
        let mut quad = 0.0;
        for i in 0..n {
            for j in 0..n {
                quad += beta[i] * k[i][j] * beta[j];
            }
        }
        let linear: f64 = (0..n)
            .map(|i| eps * (z[i] + z[n + i]) - y[i] * beta[i])
            .sum();
        0.5 * quad + linear
    }

    /// Exact projection of v onto { z : sum(s z) = 0, 0 <= z <= C } by
    /// bisection on the constraint multiplier.
    fn project(v: &[f64], n: usize, c: f64) -> Vec<f64> {
        let s = |u: usize| if u < n { 1.0 } else { -1.0 };
        let constraint = |lambda: f64| -> f64 {
            (0..2 * n)
                .map(|u| (v[u] - lambda * s(u)).clamp(0.0, c) * s(u))
                .sum()
        };
        let (mut lo, mut hi) = (-1e6, 1e6);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if constraint(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let lambda = 0.5 * (lo + hi);
        (0..2 * n)
            .map(|u| (v[u] - lambda * s(u)).clamp(0.0, c))
            .collect()
    }

    #[test]
    fn smo_matches_projected_gradient_oracle() {
        let n = 30;
        let (rows, y) = toy_problem(n, 42);
        let params = SvrParams {
            c: 5.0,
            epsilon: 0.05,
            tol: 1e-5,
            ..SvrParams::default()
        };
        let model = fit_svr(&rows, 2, &y, &params).unwrap();

        // Rebuild the standardized kernel matrix the slow way.
        let mut x = vec![0.0f64; n * 2];
        for i in 0..n {
            for j in 0..2 {
                x[i * 2 + j] = (rows[i * 2 + j] - model.means[j]) / model.scales[j];
            }
        }
        let k: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| rbf_kernel(&x[i * 2..i * 2 + 2], &x[j * 2..j * 2 + 2], model.gamma))
                    .collect()
            })
            .collect();

        // Slow projected gradient on the same dual.
        let mut z = vec![0.0f64; 2 * n];
        let step = 0.05;
        for _ in 0..60_000 {
            let beta: Vec<f64> = (0..n).map(|i| z[i] - z[n + i]).collect();
            let mut grad = vec![0.0f64; 2 * n];
            for i in 0..n {
                let kb: f64 = (0..n).map(|j| k[i][j] * beta[j]).sum();
                grad[i] = kb + params.epsilon - y[i];
                grad[n + i] = -kb + params.epsilon + y[i];
            }
            let v: Vec<f64> = (0..2 * n).map(|u| z[u] - step * grad[u]).collect();
            z = project(&v, n, params.c);
        }
        let oracle = dual_objective(&z, &k, &y, params.epsilon);

        // SMO solution's dual objective.
        let mut z_smo = vec![0.0f64; 2 * n];
        for (sv, beta) in &model.support {
            let idx = (0..n)
                .find(|&i| x[i * 2..i * 2 + 2] == sv[..])
                .expect("support vector is a training point");
            if *beta > 0.0 {
                z_smo[idx] = *beta;
            } else {
                z_smo[n + idx] = -*beta;
            }
        }
        let smo_obj = dual_objective(&z_smo, &k, &y, params.epsilon);
        assert!(
            (smo_obj - oracle).abs() <= 1e-4 * oracle.abs().max(1.0),
            "smo {smo_obj} vs pg {oracle}"
        );
        assert!(smo_obj <= oracle + 1e-4);
    }

    #[test]
    fn predictions_match_direct_kernel_sum() {
        let (rows, y) = toy_problem(24, 7);
        let model = fit_svr(&rows, 2, &y, &SvrParams::default()).unwrap();
        let preds = predict_svr(&model, &rows, 2).unwrap();
        for (i, p) in preds.iter().enumerate() {
            let mut xq = [0.0f64; 2];
            for j in 0..2 {
                xq[j] = (rows[i * 2 + j] - model.means[j]) / model.scales[j];
            }
            let direct: f64 = model.bias
                + model
                    .support
                    .iter()
                    .map(|(sv, b)| b * rbf_kernel(sv, &xq, model.gamma))
                    .sum::<f64>();
            assert!((p - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn kkt_conditions_hold_after_fit() {
        let (rows, y) = toy_problem(40, 3);
        let params = SvrParams {
            c: 3.0,
            epsilon: 0.1,
            tol: 1e-6,
            ..SvrParams::default()
        };
        let model = fit_svr(&rows, 2, &y, &params).unwrap();
        assert!(model.kkt_gap <= params.tol);
        let preds = predict_svr(&model, &rows, 2).unwrap();
        let slack = 1e-4;
        for i in 0..y.len() {
            let r = y[i] - preds[i];
            let mut xq = [0.0f64; 2];
            for j in 0..2 {
                xq[j] = (rows[i * 2 + j] - model.means[j]) / model.scales[j];
            }
            let beta = model
                .support
                .iter()
                .find(|(sv, _)| sv[..] == xq[..])
                .map(|(_, b)| *b)
                .unwrap_or(0.0);
            assert!(beta.abs() <= params.c + 1e-9);
            if r.abs() < params.epsilon - slack {
                assert!(beta.abs() <= slack, "inside tube but beta={beta}");
            }
            if beta.abs() > slack && beta.abs() < params.c - slack {
                assert!(
                    (r.abs() - params.epsilon).abs() <= slack,
                    "free SV off the tube: r={r}, beta={beta}"
                );
            }
        }
    }

    #[test]
    fn translation_shifts_predictions_exactly() {
        let (rows, y) = toy_problem(24, 11);
        let shifted: Vec<f64> = y.iter().map(|v| v + 37.5).collect();
        let a = fit_svr(&rows, 2, &y, &SvrParams::default()).unwrap();
        let b = fit_svr(&rows, 2, &shifted, &SvrParams::default()).unwrap();
        let pa = predict_svr(&a, &rows, 2).unwrap();
        let pb = predict_svr(&b, &rows, 2).unwrap();
        for (x, z) in pa.iter().zip(&pb) {
            assert!((z - x - 37.5).abs() < 1e-6);
        }
    }

    #[test]
    fn determinism_and_nonconvergence() {
        let (rows, y) = toy_problem(24, 5);
        let a = fit_svr(&rows, 2, &y, &SvrParams::default()).unwrap();
        let b = fit_svr(&rows, 2, &y, &SvrParams::default()).unwrap();
        assert_eq!(a, b);

        let starved = SvrParams {
            epsilon: 1e-6,
            max_iters: 1,
            tol: 1e-9,
            ..SvrParams::default()
        };
        let err = fit_svr(&rows, 2, &y, &starved).unwrap_err();
        assert!(matches!(err, Error::NonConvergence(_)));
    }
}
