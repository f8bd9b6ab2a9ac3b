//! Bounded-variable revised simplex.
//!
//! Solves `min c'x  s.t.  A x = b,  l <= x <= u` (finite lower bounds, upper
//! bounds may be infinite) with a dense explicit basis inverse, two phases,
//! and deterministic pivoting: Dantzig pricing with lowest-index tie-breaks,
//! switching to Bland's rule after a degenerate stall so cycling cannot
//! occur. Rows and columns are equilibrated with power-of-two factors before
//! solving, so tolerances are scale-free.
//!
//! This one core backs both the pinball-loss quantile regression fits (via
//! their bounded dual) and the LP relaxations inside the battery MILP.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// `min c'x` subject to `A x = b`, `lower <= x <= upper`.
#[derive(Debug, Clone)]
pub struct BoundedLp {
    pub n_rows: usize,
    pub n_cols: usize,
    /// Row-major `n_rows x n_cols` constraint matrix.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoundedLp {
    fn validate(&self) -> Result<()> {
        if self.a.len() != self.n_rows * self.n_cols
            || self.b.len() != self.n_rows
            || self.c.len() != self.n_cols
            || self.lower.len() != self.n_cols
            || self.upper.len() != self.n_cols
        {
            return Err(Error::DimensionMismatch("LP arrays disagree".into()));
        }
        for j in 0..self.n_cols {
            if !self.lower[j].is_finite() {
                return Err(Error::invalid("lower bounds must be finite"));
            }
            if self.upper[j] < self.lower[j] {
                return Err(Error::invalid("upper bound below lower bound"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Structural variable values (original scaling).
    pub x: Vec<f64>,
    /// Objective `c'x` in the original scaling.
    pub objective: f64,
    /// Simplex multipliers for the equality rows.
    pub duals: Vec<f64>,
    /// Artificials remained pinned in the basis: dependent rows were present.
    pub rank_deficient: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub max_iters: usize,
    /// Optimality / feasibility tolerance on the equilibrated problem.
    pub tol: f64,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub stall_limit: usize,
    /// Pivots between basis refactorisations.
    pub refactor_every: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            max_iters: 2_000_000,
            tol: 1e-9,
            stall_limit: 40,
            refactor_every: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarStatus {
    Basic,
    AtLower,
    AtUpper,
}

const PIVOT_TOL: f64 = 1e-10;

/// Nearest power of two to `1/x`, used for exact equilibration.
fn inv_pow2(x: f64) -> f64 {
    if x <= 0.0 || !x.is_finite() {
        return 1.0;
    }
    libm::exp2(libm::round(-libm::log2(x)))
}

struct Solver {
    m: usize,
    n_struct: usize,
    /// Scaled copy, row-major m x n_struct.
    a: Vec<f64>,
    art_sign: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    status: Vec<VarStatus>,
    basis: Vec<usize>,
    x: Vec<f64>,
    binv: Vec<f64>,
    b: Vec<f64>,
    /// Fixed columns (sealed artificials) never priced.
    sealed: Vec<bool>,
    iterations: usize,
    degenerate_run: usize,
    col_buf: Vec<f64>,
    dir_buf: Vec<f64>,
}

impl Solver {
    fn n_total(&self) -> usize {
        self.n_struct + self.m
    }

    fn column(&mut self, j: usize) {
        let m = self.m;
        if j < self.n_struct {
            for i in 0..m {
                self.col_buf[i] = self.a[i * self.n_struct + j];
            }
        } else {
            for v in self.col_buf.iter_mut() {
                *v = 0.0;
            }
            self.col_buf[j - self.n_struct] = self.art_sign[j - self.n_struct];
        }
    }

    /// pi = cost_B' * B^-1
    fn duals(&self, out: &mut [f64]) {
        let m = self.m;
        for v in out.iter_mut() {
            *v = 0.0;
        }
        for (slot, &bj) in self.basis.iter().enumerate() {
            let cb = self.cost[bj];
            if cb != 0.0 {
                let row = &self.binv[slot * m..(slot + 1) * m];
                for k in 0..m {
                    out[k] += cb * row[k];
                }
            }
        }
    }

    /// Reduced costs for all structural + artificial columns: r = c - pi'A.
    fn reduced_costs(&self, pi: &[f64], out: &mut [f64]) {
        let n = self.n_struct;
        out[..n].copy_from_slice(&self.cost[..n]);
        for i in 0..self.m {
            let p = pi[i];
            if p != 0.0 {
                let row = &self.a[i * n..(i + 1) * n];
                for j in 0..n {
                    out[j] -= p * row[j];
                }
            }
        }
        for i in 0..self.m {
            out[n + i] = self.cost[n + i] - pi[i] * self.art_sign[i];
        }
    }

    /// Pick the entering column, or `None` when optimal.
    fn entering(&self, reduced: &[f64], tol: f64, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None; // (j, sigma, violation)
        for j in 0..self.n_total() {
            if self.sealed[j] {
                continue;
            }
            let (sigma, viol) = match self.status[j] {
                VarStatus::Basic => continue,
                VarStatus::AtLower => (1.0, -reduced[j]),
                VarStatus::AtUpper => (-1.0, reduced[j]),
            };
            if viol > tol && self.upper[j] > self.lower[j] {
                if bland {
                    return Some((j, sigma));
                }
                if best.as_ref().is_none_or(|(_, _, bv)| viol > *bv) {
                    best = Some((j, sigma, viol));
                }
            }
        }
        best.map(|(j, sigma, _)| (j, sigma))
    }

    /// d = B^-1 a_q into `dir_buf`.
    fn direction(&mut self, q: usize) {
        self.column(q);
        let m = self.m;
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            let mut acc = 0.0;
            for k in 0..m {
                acc += row[k] * self.col_buf[k];
            }
            self.dir_buf[i] = acc;
        }
    }

    /// Gauss-Jordan refactorisation of the basis inverse plus a fresh x_B.
    fn refactor(&mut self) -> Result<()> {
        let m = self.m;
        // Assemble B column by column.
        let mut work = vec![0.0f64; m * 2 * m];
        for slot in 0..m {
            let bj = self.basis[slot];
            self.column(bj);
            for i in 0..m {
                work[i * 2 * m + slot] = self.col_buf[i];
            }
        }
        for i in 0..m {
            work[i * 2 * m + m + i] = 1.0;
        }
        for col in 0..m {
            let mut piv = col;
            let mut piv_val = work[col * 2 * m + col].abs();
            for r in col + 1..m {
                let v = work[r * 2 * m + col].abs();
                if v > piv_val {
                    piv = r;
                    piv_val = v;
                }
            }
            if piv_val < 1e-13 {
                return Err(Error::Singular("singular simplex basis".into()));
            }
            if piv != col {
                for k in 0..2 * m {
                    work.swap(col * 2 * m + k, piv * 2 * m + k);
                }
            }
            let inv = 1.0 / work[col * 2 * m + col];
            for k in 0..2 * m {
                work[col * 2 * m + k] *= inv;
            }
            for r in 0..m {
                if r != col {
                    let f = work[r * 2 * m + col];
                    if f != 0.0 {
                        for k in 0..2 * m {
                            work[r * 2 * m + k] -= f * work[col * 2 * m + k];
                        }
                    }
                }
            }
        }
        for i in 0..m {
            for k in 0..m {
                self.binv[i * m + k] = work[i * 2 * m + m + k];
            }
        }
        // x_B = B^-1 (b - N x_N)
        let mut rhs = self.b.clone();
        for j in 0..self.n_total() {
            if self.status[j] != VarStatus::Basic && self.x[j] != 0.0 {
                self.column(j);
                for i in 0..m {
                    rhs[i] -= self.col_buf[i] * self.x[j];
                }
            }
        }
        for (slot, &bj) in self.basis.iter().enumerate() {
            let row = &self.binv[slot * m..(slot + 1) * m];
            let mut acc = 0.0;
            for k in 0..m {
                acc += row[k] * rhs[k];
            }
            self.x[bj] = acc;
        }
        Ok(())
    }

    /// One simplex phase on the current cost vector.
    fn run_phase(&mut self, opts: &SimplexOptions) -> Result<LpStatus> {
        let m = self.m;
        let mut pi = vec![0.0f64; m];
        let mut reduced = vec![0.0f64; self.n_total()];
        let mut bland = false;
        loop {
            if self.iterations >= opts.max_iters {
                return Ok(LpStatus::IterationLimit);
            }
            self.duals(&mut pi);
            self.reduced_costs(&pi, &mut reduced);
            let Some((q, sigma)) = self.entering(&reduced, opts.tol, bland) else {
                return Ok(LpStatus::Optimal);
            };
            self.direction(q);

            // Ratio test: entering moves by t >= 0 from its bound.
            let span = self.upper[q] - self.lower[q];
            let mut t_best = span; // bound flip
            let mut leaving: Option<(usize, VarStatus)> = None;
            for slot in 0..m {
                let bj = self.basis[slot];
                let di = sigma * self.dir_buf[slot];
                if di > PIVOT_TOL {
                    let t = (self.x[bj] - self.lower[bj]) / di;
                    if t < t_best - 1e-12
                        || (t < t_best + 1e-12
                            && leaving.is_some_and(|(r, _)| bj < self.basis[r]))
                    {
                        t_best = t.max(0.0);
                        leaving = Some((slot, VarStatus::AtLower));
                    }
                } else if di < -PIVOT_TOL && self.upper[bj].is_finite() {
                    let t = (self.upper[bj] - self.x[bj]) / (-di);
                    if t < t_best - 1e-12
                        || (t < t_best + 1e-12
                            && leaving.is_some_and(|(r, _)| bj < self.basis[r]))
                    {
                        t_best = t.max(0.0);
                        leaving = Some((slot, VarStatus::AtUpper));
                    }
                }
            }
            if t_best.is_infinite() {
                return Ok(LpStatus::Unbounded);
            }
            self.iterations += 1;
            if t_best <= 1e-12 {
                self.degenerate_run += 1;
                if self.degenerate_run >= opts.stall_limit {
                    bland = true;
                }
            } else {
                self.degenerate_run = 0;
                bland = false;
            }

            for slot in 0..m {
                let bj = self.basis[slot];
                self.x[bj] -= sigma * t_best * self.dir_buf[slot];
            }
            match leaving {
                None => {
                    // Bound flip: no basis change.
                    self.x[q] = if sigma > 0.0 {
                        self.upper[q]
                    } else {
                        self.lower[q]
                    };
                    self.status[q] = if sigma > 0.0 {
                        VarStatus::AtUpper
                    } else {
                        VarStatus::AtLower
                    };
                }
                Some((slot, hit)) => {
                    let out_var = self.basis[slot];
                    self.status[out_var] = hit;
                    self.x[out_var] = match hit {
                        VarStatus::AtLower => self.lower[out_var],
                        VarStatus::AtUpper => self.upper[out_var],
                        VarStatus::Basic => unreachable!(),
                    };
                    self.x[q] = if sigma > 0.0 {
                        self.lower[q] + t_best
                    } else {
                        self.upper[q] - t_best
                    };
                    self.basis[slot] = q;
                    self.status[q] = VarStatus::Basic;
                    // Eta update of the explicit inverse.
                    let piv = self.dir_buf[slot];
                    let head = slot * m;
                    let inv = 1.0 / piv;
                    for k in 0..m {
                        self.binv[head + k] *= inv;
                    }
                    for i in 0..m {
                        if i != slot {
                            let f = self.dir_buf[i];
                            if f != 0.0 {
                                for k in 0..m {
                                    self.binv[i * m + k] -= f * self.binv[head + k];
                                }
                            }
                        }
                    }
                }
            }
            if self.iterations % opts.refactor_every == 0 {
                self.refactor()?;
            }
        }
    }
}

/// Solve the LP. Statuses other than `Optimal` are reported in the solution
/// rather than as errors; `Err` is reserved for malformed inputs and
/// numerical breakdown.
pub fn solve(lp: &BoundedLp, opts: &SimplexOptions) -> Result<LpSolution> {
    lp.validate()?;
    let m = lp.n_rows;
    let n = lp.n_cols;

    // Power-of-two equilibration: rows then columns.
    let mut row_scale = vec![1.0f64; m];
    for i in 0..m {
        let mx = lp.a[i * n..(i + 1) * n]
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
        row_scale[i] = inv_pow2(mx);
    }
    let mut col_scale = vec![1.0f64; n];
    for j in 0..n {
        let mut mx = 0.0f64;
        for i in 0..m {
            mx = mx.max((lp.a[i * n + j] * row_scale[i]).abs());
        }
        col_scale[j] = inv_pow2(mx);
    }
    let mut a = vec![0.0f64; m * n];
    for i in 0..m {
        for j in 0..n {
            a[i * n + j] = lp.a[i * n + j] * row_scale[i] * col_scale[j];
        }
    }
    let b: Vec<f64> = (0..m).map(|i| lp.b[i] * row_scale[i]).collect();
    // x_orig = col_scale * x_scaled
    let lower: Vec<f64> = (0..n).map(|j| lp.lower[j] / col_scale[j]).collect();
    let upper: Vec<f64> = (0..n).map(|j| lp.upper[j] / col_scale[j]).collect();
    let cost: Vec<f64> = (0..n).map(|j| lp.c[j] * col_scale[j]).collect();

    // Start all structural variables at their lower bound.
    let mut x = vec![0.0f64; n + m];
    let mut status = vec![VarStatus::AtLower; n + m];
    for j in 0..n {
        x[j] = lower[j];
    }
    // Artificial column signs make the initial artificial values nonnegative.
    let mut resid = b.clone();
    for j in 0..n {
        if x[j] != 0.0 {
            for i in 0..m {
                resid[i] -= a[i * n + j] * x[j];
            }
        }
    }
    let art_sign: Vec<f64> = resid.iter().map(|r| if *r < 0.0 { -1.0 } else { 1.0 }).collect();

    let mut full_lower = lower.clone();
    let mut full_upper = upper.clone();
    let mut phase1_cost = vec![0.0f64; n + m];
    for i in 0..m {
        full_lower.push(0.0);
        full_upper.push(f64::INFINITY);
        phase1_cost[n + i] = 1.0;
        x[n + i] = resid[i] * art_sign[i];
        status[n + i] = VarStatus::Basic;
    }

    let mut solver = Solver {
        m,
        n_struct: n,
        a,
        art_sign,
        lower: full_lower,
        upper: full_upper,
        cost: phase1_cost,
        status,
        basis: (n..n + m).collect(),
        x,
        binv: {
            let mut id = vec![0.0f64; m * m];
            for i in 0..m {
                id[i * m + i] = 1.0;
            }
            id
        },
        b,
        sealed: vec![false; n + m],
        iterations: 0,
        degenerate_run: 0,
        col_buf: vec![0.0f64; m],
        dir_buf: vec![0.0f64; m],
    };
    // The artificial basis is diag(sign), self-inverse.
    for i in 0..m {
        solver.binv[i * m + i] = solver.art_sign[i];
    }

    // Phase 1: drive the artificial infeasibility to zero.
    let phase1_status = solver.run_phase(opts)?;
    if phase1_status == LpStatus::IterationLimit {
        return Ok(limit_solution(&solver, lp, &col_scale, &row_scale));
    }
    let infeas: f64 = (0..m).map(|i| solver.x[n + i].max(0.0)).sum();
    if infeas > opts.tol * 16.0 * (m as f64).max(1.0) {
        return Ok(LpSolution {
            status: LpStatus::Infeasible,
            x: vec![0.0; n],
            objective: f64::NAN,
            duals: vec![0.0; m],
            rank_deficient: false,
            iterations: solver.iterations,
        });
    }

    // Pivot residual artificials out where possible; pin the rest (dependent
    // rows) to zero so phase 2 cannot move them.
    let mut rank_deficient = false;
    for slot in 0..m {
        let bj = solver.basis[slot];
        if bj >= n {
            // Degenerate swap: the artificial sits at zero, so any structural
            // column with a nonzero pivot element can replace it at t = 0.
            let mut swapped = false;
            for j in 0..n {
                if solver.status[j] != VarStatus::Basic && solver.upper[j] > solver.lower[j] {
                    solver.direction(j);
                    if solver.dir_buf[slot].abs() > 1e-7 {
                        solver.status[bj] = VarStatus::AtLower;
                        solver.x[bj] = 0.0;
                        solver.basis[slot] = j;
                        solver.status[j] = VarStatus::Basic;
                        solver.refactor()?;
                        swapped = true;
                        break;
                    }
                }
            }
            if !swapped {
                rank_deficient = true;
            }
        }
    }
    // Seal every artificial at zero for phase 2.
    for i in 0..m {
        solver.lower[n + i] = 0.0;
        solver.upper[n + i] = 0.0;
        solver.sealed[n + i] = true;
        if solver.status[n + i] != VarStatus::Basic {
            solver.x[n + i] = 0.0;
            solver.status[n + i] = VarStatus::AtLower;
        }
    }

    // Phase 2 on the real objective.
    solver.cost[..n].copy_from_slice(&cost);
    for i in 0..m {
        solver.cost[n + i] = 0.0;
    }
    solver.degenerate_run = 0;
    let status2 = solver.run_phase(opts)?;
    solver.refactor()?;

    let mut pi = vec![0.0f64; m];
    solver.duals(&mut pi);
    let x_out: Vec<f64> = (0..n).map(|j| solver.x[j] * col_scale[j]).collect();
    let duals: Vec<f64> = (0..m).map(|i| pi[i] * row_scale[i]).collect();
    let objective = x_out
        .iter()
        .zip(&lp.c)
        .map(|(x, c)| x * c)
        .sum::<f64>();
    Ok(LpSolution {
        status: status2,
        x: x_out,
        objective,
        duals,
        rank_deficient,
        iterations: solver.iterations,
    })
}

fn limit_solution(
    solver: &Solver,
    lp: &BoundedLp,
    col_scale: &[f64],
    row_scale: &[f64],
) -> LpSolution {
    let n = lp.n_cols;
    let x: Vec<f64> = (0..n).map(|j| solver.x[j] * col_scale[j]).collect();
    let objective = x.iter().zip(&lp.c).map(|(x, c)| x * c).sum::<f64>();
    let _ = row_scale;
    LpSolution {
        status: LpStatus::IterationLimit,
        x,
        objective,
        duals: vec![0.0; lp.n_rows],
        rank_deficient: false,
        iterations: solver.iterations,
    }
}

/// Incremental builder producing a [`BoundedLp`], adding slack columns for
/// inequality rows.
#[derive(Debug, Default)]
pub struct LpBuilder {
    costs: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    rows: Vec<(Vec<(usize, f64)>, RowKind, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    Eq,
    Le,
    Ge,
}

impl LpBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, cost: f64, lower: f64, upper: f64) -> usize {
        self.costs.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.costs.len() - 1
    }

    pub fn add_row(&mut self, kind: RowKind, rhs: f64, terms: &[(usize, f64)]) {
        self.rows.push((terms.to_vec(), kind, rhs));
    }

    pub fn n_vars(&self) -> usize {
        self.costs.len()
    }

    pub fn build(mut self) -> BoundedLp {
        let n_rows = self.rows.len();
        // One slack per inequality row.
        let mut slack_of_row = vec![usize::MAX; n_rows];
        for (i, (_, kind, _)) in self.rows.iter().enumerate() {
            if *kind != RowKind::Eq {
                self.costs.push(0.0);
                self.lower.push(0.0);
                self.upper.push(f64::INFINITY);
                slack_of_row[i] = self.costs.len() - 1;
            }
        }
        let n_cols = self.costs.len();
        let mut a = vec![0.0f64; n_rows * n_cols];
        let mut b = vec![0.0f64; n_rows];
        for (i, (terms, kind, rhs)) in self.rows.iter().enumerate() {
            for &(j, v) in terms {
                a[i * n_cols + j] += v;
            }
            match kind {
                RowKind::Eq => {}
                RowKind::Le => a[i * n_cols + slack_of_row[i]] = 1.0,
                RowKind::Ge => a[i * n_cols + slack_of_row[i]] = -1.0,
            }
            b[i] = *rhs;
        }
        BoundedLp {
            n_rows,
            n_cols,
            a,
            b,
            c: self.costs,
            lower: self.lower,
            upper: self.upper,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn textbook_lp() {
        // min -x - 2y s.t. x + y <= 4, x <= 3, y <= 2, x,y >= 0  -> (2, 2), obj -6
        let mut build = LpBuilder::new();
        let x = build.add_var(-1.0, 0.0, 3.0);
        let y = build.add_var(-2.0, 0.0, 2.0);
        build.add_row(RowKind::Le, 4.0, &[(x, 1.0), (y, 1.0)]);
        let lp = build.build();
        let sol = solve(&lp, &SimplexOptions::default()).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_close(sol.objective, -6.0, 1e-9);
        assert_close(sol.x[x], 2.0, 1e-9);
        assert_close(sol.x[y], 2.0, 1e-9);
    }

    #[test]
    fn equality_lp_with_duals() {
        // min x + 2y s.t. x + y = 1, x,y >= 0 -> x = 1, obj 1, dual 1.
        let mut build = LpBuilder::new();
        let x = build.add_var(1.0, 0.0, f64::INFINITY);
        let y = build.add_var(2.0, 0.0, f64::INFINITY);
        build.add_row(RowKind::Eq, 1.0, &[(x, 1.0), (y, 1.0)]);
        let lp = build.build();
        let sol = solve(&lp, &SimplexOptions::default()).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_close(sol.objective, 1.0, 1e-9);
        assert_close(sol.duals[0], 1.0, 1e-9);
    }

    #[test]
    fn infeasible_detected() {
        // x + y = 2 with x,y <= 0.5 each.
        let mut build = LpBuilder::new();
        let x = build.add_var(1.0, 0.0, 0.5);
        let y = build.add_var(1.0, 0.0, 0.5);
        build.add_row(RowKind::Eq, 2.0, &[(x, 1.0), (y, 1.0)]);
        let lp = build.build();
        let sol = solve(&lp, &SimplexOptions::default()).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_detected() {
        // min -x s.t. x - y = 0, x,y >= 0 (both can grow forever).
        let mut build = LpBuilder::new();
        let x = build.add_var(-1.0, 0.0, f64::INFINITY);
        let y = build.add_var(0.0, 0.0, f64::INFINITY);
        build.add_row(RowKind::Eq, 0.0, &[(x, 1.0), (y, -1.0)]);
        let lp = build.build();
        let sol = solve(&lp, &SimplexOptions::default()).unwrap();
        assert_eq!(sol.status, LpStatus::Unbounded);
    }

    #[test]
    fn negative_lower_bounds_and_flips() {
        // min x + y with x in [-5, -1], y in [-2, 3], x + y >= -4.
        let mut build = LpBuilder::new();
        let x = build.add_var(1.0, -5.0, -1.0);
        let y = build.add_var(1.0, -2.0, 3.0);
        build.add_row(RowKind::Ge, -4.0, &[(x, 1.0), (y, 1.0)]);
        let lp = build.build();
        let sol = solve(&lp, &SimplexOptions::default()).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_close(sol.objective, -4.0, 1e-9);
    }

    #[test]
    fn badly_scaled_problem() {
        // Columns spanning 12 orders of magnitude still solve cleanly.
        let mut build = LpBuilder::new();
        let x = build.add_var(1.0, 0.0, f64::INFINITY);
        let y = build.add_var(1e-6, 0.0, f64::INFINITY);
        build.add_row(RowKind::Eq, 3e12, &[(x, 1e12), (y, 1e6)]);
        let lp = build.build();
        let sol = solve(&lp, &SimplexOptions::default()).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        // Cheapest: use y = 3e6 at cost 3, vs x = 3 at cost 3 - degenerate tie;
        // either vertex costs 3.
        assert_close(sol.objective, 3.0, 1e-6);
    }

    #[test]
    fn rank_deficient_rows_flagged() {
        // Duplicate constraint rows.
        let mut build = LpBuilder::new();
        let x = build.add_var(1.0, 0.0, f64::INFINITY);
        let y = build.add_var(1.0, 0.0, f64::INFINITY);
        build.add_row(RowKind::Eq, 1.0, &[(x, 1.0), (y, 1.0)]);
        build.add_row(RowKind::Eq, 1.0, &[(x, 1.0), (y, 1.0)]);
        let lp = build.build();
        let sol = solve(&lp, &SimplexOptions::default()).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!(sol.rank_deficient);
        assert_close(sol.objective, 1.0, 1e-9);
    }
}
