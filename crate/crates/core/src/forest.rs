//! Quantile regression forest: bagged CART trees whose leaf-weight averages
//! define a conditional CDF, from which any quantile can be read.
//!
//! Trees split greedily on mean-squared-deviation reduction over a random
//! `mtry`-sized feature subset, exactly as a regression random forest; the
//! quantile extension only changes prediction, which aggregates the weighted
//! empirical distribution of training targets instead of their mean.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Forest hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForestHyperparams {
    pub n_trees: usize,
    /// Features tried per split; `None` means `ceil(width / 3)`.
    pub mtry: Option<usize>,
    /// Minimum samples in each child of a split.
    pub min_leaf: usize,
    /// Resample `n` rows with replacement per tree; out-of-bag rows get zero
    /// weight in that tree.
    pub bootstrap: bool,
    /// Optional depth cap; root splits are depth 1.
    pub max_depth: Option<usize>,
}

impl Default for ForestHyperparams {
    fn default() -> Self {
        ForestHyperparams {
            n_trees: 200,
            mtry: None,
            min_leaf: 5,
            bootstrap: true,
            max_depth: None,
        }
    }
}

/// Binary split record or leaf holding training-row indices (with bootstrap
/// multiplicity).
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: u32,
        right: u32,
    },
    Leaf {
        rows: Vec<u32>,
    },
}

/// One fitted tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Leaf row-set for a query point.
    pub fn leaf_rows(&self, x: &[f64]) -> &[u32] {
        let mut idx = 0u32;
        loop {
            match &self.nodes[idx as usize] {
                Node::Leaf { rows } => return rows,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    idx = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }
}

/// A bagged forest over a fixed training set.
#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    trees: Vec<Tree>,
    targets: Vec<f64>,
    /// Training-row indices ordered by ascending target.
    order: Vec<u32>,
    width: usize,
    hyper: ForestHyperparams,
    seed: u64,
}

/// Right-continuous step estimate of the conditional CDF: `(y, F(y))` at each
/// distinct jump point, nondecreasing with final value 1 (up to rounding).
#[derive(Debug, Clone, PartialEq)]
pub struct CdfEstimate {
    points: Vec<(f64, f64)>,
}

impl CdfEstimate {
    pub fn jump_points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Evaluate the step function.
    pub fn eval(&self, y: f64) -> f64 {
        match self
            .points
            .binary_search_by(|(p, _)| p.total_cmp(&y))
        {
            Ok(i) => self.points[i].1,
            Err(0) => 0.0,
            Err(i) => self.points[i - 1].1,
        }
    }

    /// Smallest jump point with `q <= F(y)`.
    pub fn quantile(&self, q: f64) -> f64 {
        let target = q - 1e-12;
        for (y, cum) in &self.points {
            if *cum >= target {
                return *y;
            }
        }
        self.points.last().map(|(y, _)| *y).unwrap_or(f64::NAN)
    }
}

/// Grow a forest. Identical `(data, hyperparams, seed)` always produce an
/// identical forest.
pub fn fit_forest(
    rows: &[f64],
    width: usize,
    y: &[f64],
    hyper: &ForestHyperparams,
    seed: u64,
) -> Result<Forest> {
    let n = y.len();
    if width == 0 || rows.len() != n * width {
        return Err(Error::DimensionMismatch(alloc::format!(
            "matrix of {} entries does not factor as {n} x {width}",
            rows.len()
        )));
    }
    if hyper.n_trees == 0 || hyper.min_leaf == 0 {
        return Err(Error::invalid("n_trees and min_leaf must be positive"));
    }
    if n < hyper.min_leaf {
        return Err(Error::InsufficientHistory {
            required: hyper.min_leaf,
            available: n,
        });
    }
    let mtry = hyper.mtry.unwrap_or(width.div_ceil(3)).clamp(1, width);

    let mut trees = Vec::with_capacity(hyper.n_trees);
    for t in 0..hyper.n_trees {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t as u64 + 1);
        let sample: Vec<u32> = if hyper.bootstrap {
            (0..n).map(|_| rng.random_range(0..n) as u32).collect()
        } else {
            (0..n as u32).collect()
        };
        let mut grower = Grower {
            rows,
            width,
            y,
            min_leaf: hyper.min_leaf,
            mtry,
            max_depth: hyper.max_depth,
            rng: &mut rng,
            nodes: Vec::new(),
        };
        grower.build(sample, 0);
        trees.push(Tree {
            nodes: grower.nodes,
        });
    }

    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_by(|a, b| y[*a as usize].total_cmp(&y[*b as usize]));
    Ok(Forest {
        trees,
        targets: y.to_vec(),
        order,
        width,
        hyper: *hyper,
        seed,
    })
}

struct Grower<'a> {
    rows: &'a [f64],
    width: usize,
    y: &'a [f64],
    min_leaf: usize,
    mtry: usize,
    max_depth: Option<usize>,
    rng: &'a mut ChaCha8Rng,
    nodes: Vec<Node>,
}

impl Grower<'_> {
    fn build(&mut self, samples: Vec<u32>, depth: usize) -> u32 {
        if let Some(split) = self.best_split(&samples, depth) {
            let (feature, threshold) = split;
            let (mut left, mut right) = (Vec::new(), Vec::new());
            for &s in &samples {
                if self.rows[s as usize * self.width + feature] <= threshold {
                    left.push(s);
                } else {
                    right.push(s);
                }
            }
            let idx = self.nodes.len() as u32;
            self.nodes.push(Node::Split {
                feature,
                threshold,
                left: 0,
                right: 0,
            });
            let l = self.build(left, depth + 1);
            let r = self.build(right, depth + 1);
            if let Node::Split { left, right, .. } = &mut self.nodes[idx as usize] {
                *left = l;
                *right = r;
            }
            idx
        } else {
            self.nodes.push(Node::Leaf { rows: samples });
            self.nodes.len() as u32 - 1
        }
    }

    /// Candidate features in ascending index order so that equal-gain ties
    /// resolve to the lowest feature index, then the lowest threshold.
    fn candidate_features(&mut self) -> Vec<usize> {
        if self.mtry >= self.width {
            return (0..self.width).collect();
        }
        let mut pool: Vec<usize> = (0..self.width).collect();
        for i in 0..self.mtry {
            let j = self.rng.random_range(i..pool.len());
            pool.swap(i, j);
        }
        let mut chosen = pool[..self.mtry].to_vec();
        chosen.sort_unstable();
        chosen
    }

    fn best_split(&mut self, samples: &[u32], depth: usize) -> Option<(usize, f64)> {
        let k = samples.len();
        if k < 2 * self.min_leaf {
            return None;
        }
        if let Some(cap) = self.max_depth {
            if depth >= cap {
                return None;
            }
        }
        let (mut sum, mut sum_sq) = (0.0f64, 0.0f64);
        for &s in samples {
            let v = self.y[s as usize];
            sum += v;
            sum_sq += v * v;
        }
        let sse_parent = sum_sq - sum * sum / k as f64;
        if sse_parent <= 1e-12 * sum_sq.abs().max(1.0) {
            return None; // constant targets
        }

        let mut best: Option<(f64, usize, f64)> = None; // (gain, feature, threshold)
        let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(k);
        for feature in self.candidate_features() {
            pairs.clear();
            for &s in samples {
                pairs.push((
                    self.rows[s as usize * self.width + feature],
                    self.y[s as usize],
                ));
            }
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            if pairs[0].0 == pairs[k - 1].0 {
                continue;
            }
            let (mut lsum, mut lsq) = (0.0f64, 0.0f64);
            for i in 0..k - 1 {
                lsum += pairs[i].1;
                lsq += pairs[i].1 * pairs[i].1;
                if pairs[i].0 == pairs[i + 1].0 {
                    continue;
                }
                let ln = (i + 1) as f64;
                let rn = (k - i - 1) as f64;
                if (i + 1) < self.min_leaf || (k - i - 1) < self.min_leaf {
                    continue;
                }
                let rsum = sum - lsum;
                let rsq = sum_sq - lsq;
                let gain = sse_parent - (lsq - lsum * lsum / ln) - (rsq - rsum * rsum / rn);
                if best.is_none_or(|(bg, _, _)| gain > bg) {
                    best = Some((gain, feature, (pairs[i].0 + pairs[i + 1].0) / 2.0));
                }
            }
        }
        best.filter(|(gain, _, _)| *gain > 0.0)
            .map(|(_, f, t)| (f, t))
    }
}

impl Forest {
    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn hyperparams(&self) -> &ForestHyperparams {
        &self.hyper
    }

    /// Averaged leaf weights over the original training rows for one query.
    /// The weights sum to 1.
    pub fn weights(&self, x: &[f64]) -> Vec<f64> {
        let n = self.targets.len();
        let mut acc = alloc::vec![0.0f64; n];
        let per_tree = 1.0 / self.trees.len() as f64;
        for tree in &self.trees {
            let rows = tree.leaf_rows(x);
            let w = per_tree / rows.len() as f64;
            for &r in rows {
                acc[r as usize] += w;
            }
        }
        acc
    }

    /// Weighted empirical conditional CDF at a query point.
    pub fn conditional_cdf(&self, x: &[f64]) -> CdfEstimate {
        let weights = self.weights(x);
        let mut points: Vec<(f64, f64)> = Vec::new();
        let mut cum = 0.0;
        for &i in &self.order {
            let w = weights[i as usize];
            let y = self.targets[i as usize];
            cum += w;
            match points.last_mut() {
                Some((py, pc)) if *py == y => *pc = cum,
                _ => points.push((y, cum)),
            }
        }
        CdfEstimate { points }
    }

    /// `inf { y in training targets : q <= F(y) }`.
    pub fn predict_quantile(&self, x: &[f64], q: f64) -> Result<f64> {
        if !(0.0 < q && q < 1.0) {
            return Err(Error::invalid("quantile level must lie in (0, 1)"));
        }
        Ok(self.conditional_cdf(x).quantile(q))
    }

    /// Read several levels off one conditional CDF.
    pub fn predict_levels(&self, x: &[f64], levels: &[f64]) -> Result<Vec<f64>> {
        for &q in levels {
            if !(0.0 < q && q < 1.0) {
                return Err(Error::invalid("quantile level must lie in (0, 1)"));
            }
        }
        let cdf = self.conditional_cdf(x);
        Ok(levels.iter().map(|&q| cdf.quantile(q)).collect())
    }
}
