use ndarray::{ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::folds::FoldPlan;
use super::lasso::{fold_rows, fold_score};
use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, substream, BenchRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub n_trees: usize,
    pub min_samples_leaf: usize,
    /// Fraction of features tried at each node, rounded up.
    pub max_features: f64,
    pub max_depth: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            min_samples_leaf: 1,
            max_features: 1.0 / 3.0,
            max_depth: None,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl ForestParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::Config("n_trees must be at least 1".into()));
        }
        if self.min_samples_leaf < 1 {
            return Err(Error::Config("min_samples_leaf must be at least 1".into()));
        }
        if !(self.max_features > 0.0 && self.max_features <= 1.0) {
            return Err(Error::Config(format!("max_features {} is outside (0, 1]", self.max_features)));
        }
        Ok(())
    }

    /// Features tried per node for `p` columns.
    pub fn features_per_node(&self, p: usize) -> usize {
        ((p as f64 * self.max_features - 1e-9).ceil() as usize).clamp(1, p.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Node {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    nodes: Vec<Node>,
}

impl RegressionTree {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf(v) => return v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if row[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf(_))).count()
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, left).max(go(nodes, right)),
            }
        }
        go(&self.nodes, 0)
    }

    /// The root split as `(feature, threshold)`, if any.
    pub fn root_split(&self) -> Option<(usize, f64)> {
        match self.nodes[0] {
            Node::Split { feature, threshold, .. } => Some((feature, threshold)),
            Node::Leaf(_) => None,
        }
    }
}

/// Mean that is exact when all values are equal.
fn stable_mean(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let mut it = values.clone();
    let Some(first) = it.next() else { return f64::NAN };
    let (mut sum, mut n) = (0.0, 1usize);
    for v in it {
        sum += v - first;
        n += 1;
    }
    first + sum / n as f64
}

struct Builder<'a> {
    cols: &'a [Vec<f64>],
    y: &'a [f64],
    params: &'a ForestParams,
    m: usize,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn leaf(&mut self, idx: &[usize]) -> usize {
        let v = stable_mean(idx.iter().map(|&i| self.y[i]));
        self.nodes.push(Node::Leaf(v));
        self.nodes.len() - 1
    }

    /// Best split of `idx` on feature `f` as (gain, threshold, n_left).
    fn best_on_feature(&self, f: usize, idx: &mut [usize], total: f64, total_sq: f64) -> Option<(f64, f64, usize)> {
        let col = &self.cols[f];
        idx.sort_by(|&a, &b| col[a].total_cmp(&col[b]));
        let n = idx.len();
        let min_leaf = self.params.min_samples_leaf;
        let parent_sse = total_sq - total * total / n as f64;
        let mut best: Option<(f64, f64, usize)> = None;
        let mut left_sum = 0.0;
        for k in 1..n {
            left_sum += self.y[idx[k - 1]];
            let (lo, hi) = (col[idx[k - 1]], col[idx[k]]);
            if lo == hi || k < min_leaf || n - k < min_leaf {
                continue;
            }
            let right_sum = total - left_sum;
            // SSE reduction equals the gain in sum^2/count terms.
            let gain = left_sum * left_sum / k as f64 + right_sum * right_sum / (n - k) as f64 - total * total / n as f64;
            if gain > 1e-12 * parent_sse.abs().max(f64::MIN_POSITIVE) && best.is_none_or(|b| gain > b.0) {
                let mid = lo + (hi - lo) / 2.0;
                let threshold = if mid < hi { mid } else { lo };
                best = Some((gain, threshold, k));
            }
        }
        best
    }

    fn build(&mut self, idx: &mut [usize], depth: usize, rng: &mut BenchRng) -> usize {
        let n = idx.len();
        let at_depth = self.params.max_depth.is_some_and(|d| depth >= d);
        if n < 2 * self.params.min_samples_leaf || at_depth {
            return self.leaf(idx);
        }
        let total: f64 = idx.iter().map(|&i| self.y[i]).sum();
        let total_sq: f64 = idx.iter().map(|&i| self.y[i] * self.y[i]).sum();
        let first = self.y[idx[0]];
        if idx.iter().all(|&i| self.y[i] == first) {
            return self.leaf(idx);
        }
        let mut features: Vec<usize> = (0..self.cols.len()).collect();
        features.shuffle(rng);
        let mut best: Option<(f64, usize, f64)> = None;
        for (tried, &f) in features.iter().enumerate() {
            if tried >= self.m && best.is_some() {
                break;
            }
            if let Some((gain, thr, _)) = self.best_on_feature(f, idx, total, total_sq) {
                if best.is_none_or(|b| gain > b.0) {
                    best = Some((gain, f, thr));
                }
            }
        }
        let Some((_, feature, threshold)) = best else {
            return self.leaf(idx);
        };
        let col = &self.cols[feature];
        idx.sort_by(|&a, &b| col[a].total_cmp(&col[b]).then(a.cmp(&b)));
        let split = idx.partition_point(|&i| col[i] <= threshold);
        let me = self.nodes.len();
        self.nodes.push(Node::Leaf(f64::NAN));
        let (l, r) = idx.split_at_mut(split);
        let left = self.build(l, depth + 1, rng);
        let right = self.build(r, depth + 1, rng);
        self.nodes[me] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        me
    }
}

fn columns(x: ArrayView2<f64>) -> Vec<Vec<f64>> {
    x.axis_iter(Axis(1)).map(|c| c.to_vec()).collect()
}

fn check(x: ArrayView2<f64>, y: &[f64]) -> Result<()> {
    if x.nrows() != y.len() {
        return Err(Error::BadInput(format!("{} rows but {} targets", x.nrows(), y.len())));
    }
    if y.is_empty() {
        return Err(Error::EmptySplit);
    }
    if !x.iter().chain(y).all(|v| v.is_finite()) {
        return Err(Error::BadInput("non-finite value in forest inputs".into()));
    }
    Ok(())
}

fn grow_tree(cols: &[Vec<f64>], y: &[f64], params: &ForestParams, seed: u64) -> RegressionTree {
    let mut rng = rng_from_seed(seed);
    let n = y.len();
    let mut idx: Vec<usize> = if params.bootstrap {
        (0..n).map(|_| rng.gen_range(0..n)).collect()
    } else {
        (0..n).collect()
    };
    let mut b = Builder {
        cols,
        y,
        params,
        m: params.features_per_node(cols.len()),
        nodes: Vec::new(),
    };
    b.build(&mut idx, 0, &mut rng);
    RegressionTree { nodes: b.nodes }
}

/// Fits a single CART regression tree with `params` (tree count ignored).
pub fn tree_fit(x: ArrayView2<f64>, y: &[f64], params: &ForestParams) -> Result<RegressionTree> {
    params.validate()?;
    check(x, y)?;
    Ok(grow_tree(&columns(x), y, params, substream(params.seed, "tree/0")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub params: ForestParams,
    pub trees: Vec<RegressionTree>,
}

impl RandomForest {
    pub fn predict(&self, x: ArrayView2<f64>) -> Vec<f64> {
        x.axis_iter(Axis(0))
            .map(|row| {
                let row = row.to_vec();
                stable_mean(self.trees.iter().map(|t| t.predict_row(&row)))
            })
            .collect()
    }
}

/// Trees are grown in parallel, tree `t` from seed `substream(seed, "tree/t")`.
pub fn rf_fit(x: ArrayView2<f64>, y: &[f64], params: &ForestParams) -> Result<RandomForest> {
    params.validate()?;
    check(x, y)?;
    let cols = columns(x);
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| grow_tree(&cols, y, params, substream(params.seed, &format!("tree/{t}"))))
        .collect();
    Ok(RandomForest {
        params: params.clone(),
        trees,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestCv {
    pub best_min_samples_leaf: usize,
    /// Mean inner-fold Pearson r per grid value, in grid order.
    pub scores: Vec<f64>,
    pub forest: RandomForest,
}

/// Picks `min_samples_leaf` by mean Pearson r over the grouped inner folds,
/// then refits on all rows. Ties go to the earlier grid value.
pub fn rf_cv(
    x: ArrayView2<f64>,
    y: &[f64],
    groups: &[String],
    folds: &FoldPlan,
    base: &ForestParams,
    leaf_grid: &[usize],
) -> Result<ForestCv> {
    check(x, y)?;
    if leaf_grid.is_empty() {
        return Err(Error::Config("empty min_samples_leaf grid".into()));
    }
    let mut scores = Vec::with_capacity(leaf_grid.len());
    for &leaf in leaf_grid {
        let params = ForestParams {
            min_samples_leaf: leaf,
            ..base.clone()
        };
        params.validate()?;
        let mut sum = 0.0;
        for f in 0..folds.k {
            let (tr, te) = fold_rows(groups, folds, f)?;
            if tr.is_empty() || te.is_empty() {
                return Err(Error::EmptySplit);
            }
            let ytr: Vec<f64> = tr.iter().map(|&i| y[i]).collect();
            let yte: Vec<f64> = te.iter().map(|&i| y[i]).collect();
            let forest = rf_fit(x.select(Axis(0), &tr).view(), &ytr, &params)?;
            sum += fold_score(&forest.predict(x.select(Axis(0), &te).view()), &yte)?;
        }
        scores.push(sum / folds.k as f64);
    }
    let best = scores
        .iter()
        .enumerate()
        .fold(0, |best, (i, &s)| if s > scores[best] { i } else { best });
    let params = ForestParams {
        min_samples_leaf: leaf_grid[best],
        ..base.clone()
    };
    Ok(ForestCv {
        best_min_samples_leaf: leaf_grid[best],
        scores,
        forest: rf_fit(x, y, &params)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{concatenate, Array2};
    use proptest::prelude::*;

    fn exact() -> ForestParams {
        ForestParams {
            n_trees: 1,
            min_samples_leaf: 1,
            max_features: 1.0,
            max_depth: None,
            bootstrap: false,
            seed: 3,
        }
    }

    #[test]
    fn step_function_stump() {
        let x = Array2::from_shape_fn((20, 1), |(i, _)| i as f64);
        let y: Vec<f64> = (0..20).map(|i| if i < 7 { 1.0 } else { 4.0 }).collect();
        let tree = tree_fit(x.view(), &y, &ForestParams { max_depth: Some(1), ..exact() }).unwrap();
        assert_eq!(tree.root_split(), Some((0, 6.5)));
        assert_eq!(tree.predict_row(&[3.0]), 1.0);
        assert_eq!(tree.predict_row(&[15.0]), 4.0);
        assert_eq!(tree.n_leaves(), 2);
    }

    #[test]
    fn stump_picks_largest_variance_reduction() {
        // Brute-force every cut point of an uneven 1-D target.
        let x = Array2::from_shape_fn((8, 1), |(i, _)| i as f64);
        let y = [0.0, 1.0, 0.5, 3.0, 2.5, 3.5, 9.0, 8.0];
        let sse = |v: &[f64]| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            v.iter().map(|a| (a - m) * (a - m)).sum::<f64>()
        };
        let best_k = (1..8)
            .min_by(|&a, &b| (sse(&y[..a]) + sse(&y[a..])).total_cmp(&(sse(&y[..b]) + sse(&y[b..]))))
            .unwrap();
        let tree = tree_fit(x.view(), &y, &ForestParams { max_depth: Some(1), ..exact() }).unwrap();
        assert_eq!(tree.root_split(), Some((0, best_k as f64 - 0.5)));
    }

    #[test]
    fn constant_target() {
        let x = Array2::from_shape_fn((30, 3), |(i, j)| ((i * 7 + j * 3) % 11) as f64);
        let y = vec![0.1; 30];
        let f = rf_fit(x.view(), &y, &ForestParams { n_trees: 10, seed: 9, ..Default::default() }).unwrap();
        assert!(f.predict(x.view()).iter().all(|&p| p == 0.1));
    }

    #[test]
    fn invalid_params() {
        let x = Array2::zeros((3, 1));
        let p = ForestParams { min_samples_leaf: 0, ..Default::default() };
        assert!(matches!(rf_fit(x.view(), &[0.0; 3], &p), Err(Error::Config(_))));
        assert_eq!(ForestParams::default().features_per_node(94), 32);
        assert_eq!(ForestParams::default().features_per_node(3), 1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn full_tree_memorizes_distinct_rows(
            vals in prop::collection::vec(-100i32..100, 40),
            ys in prop::collection::vec(-5.0f64..5.0, 20),
        ) {
            let x = Array2::from_shape_fn((20, 2), |(i, j)| vals[i * 2 + j] as f64 + i as f64 * 1e-3);
            let tree = tree_fit(x.view(), &ys, &exact()).unwrap();
            for (i, row) in x.axis_iter(Axis(0)).enumerate() {
                prop_assert_eq!(tree.predict_row(&row.to_vec()), ys[i]);
            }
        }

        #[test]
        fn duplicating_training_set_changes_nothing(
            vals in prop::collection::vec(-10.0f64..10.0, 45),
            ys in prop::collection::vec(-5.0f64..5.0, 15),
            seed in any::<u64>(),
        ) {
            let x = Array2::from_shape_vec((15, 3), vals).unwrap();
            let params = ForestParams { n_trees: 5, bootstrap: false, seed, ..Default::default() };
            let x2 = concatenate![Axis(0), x, x];
            let y2: Vec<f64> = ys.iter().chain(&ys).copied().collect();
            let probe = Array2::from_shape_fn((10, 3), |(i, j)| (i as f64 - 5.0) * (j as f64 + 0.7));
            let a = rf_fit(x.view(), &ys, &params).unwrap().predict(probe.view());
            let b = rf_fit(x2.view(), &y2, &params).unwrap().predict(probe.view());
            for (p, q) in a.iter().zip(&b) {
                prop_assert!((p - q).abs() < 1e-9);
            }
        }
    }
}
