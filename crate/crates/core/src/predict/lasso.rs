use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::folds::FoldPlan;
use super::metrics::pearson_r;
use crate::error::{Error, Result};

/// Stop when no coefficient moves more than this in a sweep.
pub const LASSO_TOL: f64 = 1e-7;
const MAX_SWEEPS: usize = 100_000;

/// `n` values spaced evenly in log10 between `lo` and `hi`, ascending.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64)).collect(),
    }
}

pub fn default_lambda_grid() -> Vec<f64> {
    logspace(1e-4, 1e1, 20)
}

/// Column means and population standard deviations from a training matrix.
/// Constant columns get scale 1 so they stay constant (and get no weight).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: ArrayView2<f64>) -> Self {
        let n = x.nrows().max(1) as f64;
        let mut mean = Vec::with_capacity(x.ncols());
        let mut scale = Vec::with_capacity(x.ncols());
        for col in x.axis_iter(Axis(1)) {
            let m = col.sum() / n;
            let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
            mean.push(m);
            scale.push(if var > 0.0 { var.sqrt() } else { 1.0 });
        }
        Standardizer { mean, scale }
    }

    pub fn transform(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let mut out = x.to_owned();
        for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            col.mapv_inplace(|v| (v - self.mean[j]) / self.scale[j]);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoModel {
    pub lambda: f64,
    pub intercept: f64,
    pub coef: Vec<f64>,
    pub sweeps: usize,
    pub converged: bool,
    /// Objective after each sweep.
    pub objective: Vec<f64>,
}

impl LassoModel {
    pub fn predict(&self, x: ArrayView2<f64>) -> Vec<f64> {
        x.axis_iter(Axis(0))
            .map(|row| self.intercept + row.iter().zip(&self.coef).map(|(a, b)| a * b).sum::<f64>())
            .collect()
    }

    pub fn n_nonzero(&self) -> usize {
        self.coef.iter().filter(|&&b| b != 0.0).count()
    }
}

fn soft_threshold(z: f64, g: f64) -> f64 {
    if z > g {
        z - g
    } else if z < -g {
        z + g
    } else {
        0.0
    }
}

fn check_inputs(x: ArrayView2<f64>, y: &[f64]) -> Result<()> {
    if x.nrows() != y.len() {
        return Err(Error::BadInput(format!("{} rows but {} targets", x.nrows(), y.len())));
    }
    if y.is_empty() {
        return Err(Error::EmptySplit);
    }
    if !x.iter().chain(y).all(|v| v.is_finite()) {
        return Err(Error::BadInput("non-finite value in lasso inputs".into()));
    }
    Ok(())
}

/// Centered columns kept column-major for the sweeps.
struct Centered {
    cols: Vec<Vec<f64>>,
    x_mean: Vec<f64>,
    y_mean: f64,
    yc: Vec<f64>,
    sq_norm: Vec<f64>,
}

impl Centered {
    fn new(x: ArrayView2<f64>, y: &[f64]) -> Self {
        let n = y.len() as f64;
        let y_mean = y.iter().sum::<f64>() / n;
        let mut cols = Vec::with_capacity(x.ncols());
        let mut x_mean = Vec::with_capacity(x.ncols());
        let mut sq_norm = Vec::with_capacity(x.ncols());
        for col in x.axis_iter(Axis(1)) {
            let m = col.sum() / n;
            let c: Vec<f64> = col.iter().map(|v| v - m).collect();
            sq_norm.push(c.iter().map(|v| v * v).sum::<f64>() / n);
            cols.push(c);
            x_mean.push(m);
        }
        Centered {
            cols,
            x_mean,
            y_mean,
            yc: y.iter().map(|v| v - y_mean).collect(),
            sq_norm,
        }
    }

    fn objective(&self, resid: &[f64], beta: &[f64], lambda: f64) -> f64 {
        let n = resid.len() as f64;
        resid.iter().map(|r| r * r).sum::<f64>() / (2.0 * n) + lambda * beta.iter().map(|b| b.abs()).sum::<f64>()
    }

    /// Coordinate descent from `beta`, updated in place.
    fn solve(&self, beta: &mut [f64], lambda: f64, tol: f64) -> LassoModel {
        let n = self.yc.len() as f64;
        let mut resid = self.yc.clone();
        for (j, &b) in beta.iter().enumerate() {
            if b != 0.0 {
                for (r, x) in resid.iter_mut().zip(&self.cols[j]) {
                    *r -= x * b;
                }
            }
        }
        let mut objective = Vec::new();
        let mut converged = false;
        let mut sweeps = 0;
        while sweeps < MAX_SWEEPS {
            sweeps += 1;
            let mut max_change = 0.0f64;
            for j in 0..beta.len() {
                if self.sq_norm[j] == 0.0 {
                    beta[j] = 0.0;
                    continue;
                }
                let col = &self.cols[j];
                let old = beta[j];
                let rho = col.iter().zip(&resid).map(|(x, r)| x * r).sum::<f64>() / n + self.sq_norm[j] * old;
                let new = soft_threshold(rho, lambda) / self.sq_norm[j];
                if new != old {
                    let d = new - old;
                    for (r, x) in resid.iter_mut().zip(col) {
                        *r -= x * d;
                    }
                    beta[j] = new;
                    max_change = max_change.max(d.abs());
                }
            }
            objective.push(self.objective(&resid, beta, lambda));
            if max_change < tol {
                converged = true;
                break;
            }
        }
        let intercept = self.y_mean - self.x_mean.iter().zip(beta.iter()).map(|(m, b)| m * b).sum::<f64>();
        LassoModel {
            lambda,
            intercept,
            coef: beta.to_vec(),
            sweeps,
            converged,
            objective,
        }
    }
}

/// Minimizes `(1/2n)|y - Xb - b0|^2 + lambda |b|_1` by cyclic coordinate
/// descent with an unpenalized intercept. `x` is used as given; see
/// [`Standardizer`].
pub fn lasso_fit(x: ArrayView2<f64>, y: &[f64], lambda: f64) -> Result<LassoModel> {
    Ok(lasso_path(x, y, &[lambda])?.remove(0))
}

/// Fits each lambda in turn, warm-starting from the previous solution.
/// Models come back in the order of `lambdas`.
pub fn lasso_path(x: ArrayView2<f64>, y: &[f64], lambdas: &[f64]) -> Result<Vec<LassoModel>> {
    check_inputs(x, y)?;
    if lambdas.is_empty() {
        return Err(Error::Config("empty lambda grid".into()));
    }
    if let Some(l) = lambdas.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
        return Err(Error::Config(format!("lambda {l} is not a non-negative number")));
    }
    let c = Centered::new(x, y);
    let mut order: Vec<usize> = (0..lambdas.len()).collect();
    order.sort_by(|&a, &b| lambdas[b].total_cmp(&lambdas[a]));
    let mut beta = vec![0.0; x.ncols()];
    let mut out: Vec<Option<LassoModel>> = vec![None; lambdas.len()];
    for i in order {
        out[i] = Some(c.solve(&mut beta, lambdas[i], LASSO_TOL));
    }
    Ok(out.into_iter().map(|m| m.expect("every lambda solved")).collect())
}

/// Smallest lambda at which every coefficient is zero: `max_j |x_j^T (y - mean y)| / n`.
pub fn lambda_max(x: ArrayView2<f64>, y: &[f64]) -> Result<f64> {
    check_inputs(x, y)?;
    let c = Centered::new(x, y);
    let n = y.len() as f64;
    Ok(c.cols
        .iter()
        .map(|col| (col.iter().zip(&c.yc).map(|(a, b)| a * b).sum::<f64>() / n).abs())
        .fold(0.0, f64::max))
}

/// Largest violation of the lasso optimality conditions: for non-zero
/// coefficients `|x_j^T r / n - lambda sign(b_j)|`, for zero ones the excess
/// of `|x_j^T r / n|` over lambda.
pub fn kkt_violation(x: ArrayView2<f64>, y: &[f64], model: &LassoModel) -> f64 {
    let pred = model.predict(x);
    let n = y.len() as f64;
    let resid: Vec<f64> = y.iter().zip(&pred).map(|(a, b)| a - b).collect();
    x.axis_iter(Axis(1))
        .zip(&model.coef)
        .map(|(col, &b)| {
            let g = col.iter().zip(&resid).map(|(a, r)| a * r).sum::<f64>() / n;
            if b != 0.0 {
                (g - model.lambda * b.signum()).abs()
            } else {
                (g.abs() - model.lambda).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

/// Lasso on standardized columns with the scaling learned from training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizedLasso {
    pub standardizer: Standardizer,
    pub model: LassoModel,
}

impl StandardizedLasso {
    pub fn predict(&self, x: ArrayView2<f64>) -> Vec<f64> {
        self.model.predict(self.standardizer.transform(x).view())
    }
}

fn standardized_path(x: ArrayView2<f64>, y: &[f64], lambdas: &[f64]) -> Result<Vec<StandardizedLasso>> {
    let standardizer = Standardizer::fit(x);
    let xs = standardizer.transform(x);
    Ok(lasso_path(xs.view(), y, lambdas)?
        .into_iter()
        .map(|model| StandardizedLasso {
            standardizer: standardizer.clone(),
            model,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoCv {
    pub best_lambda: f64,
    /// Mean inner-fold Pearson r for each grid value, in grid order.
    pub scores: Vec<f64>,
    pub model: StandardizedLasso,
}

/// Indices of rows whose group is in fold `f` and of the rest.
pub(crate) fn fold_rows(groups: &[String], plan: &FoldPlan, f: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (i, g) in groups.iter().enumerate() {
        match plan.fold_of(g) {
            Some(k) if k == f => test.push(i),
            Some(_) => train.push(i),
            None => return Err(Error::InternalInvariant(format!("question {g} has no fold"))),
        }
    }
    Ok((train, test))
}

/// Scores a prediction, counting a constant one as r = 0.
pub(crate) fn fold_score(pred: &[f64], obs: &[f64]) -> Result<f64> {
    match pearson_r(pred, obs) {
        Ok(r) => Ok(r),
        Err(Error::ConstantPrediction) => Ok(0.0),
        Err(e) => Err(e),
    }
}

/// Picks lambda by mean Pearson r over the grouped inner folds, then refits
/// on all rows. Ties go to the earlier grid value.
pub fn lasso_cv(x: ArrayView2<f64>, y: &[f64], groups: &[String], folds: &FoldPlan, grid: &[f64]) -> Result<LassoCv> {
    check_inputs(x, y)?;
    if grid.is_empty() {
        return Err(Error::Config("empty lambda grid".into()));
    }
    let mut sums = vec![0.0; grid.len()];
    for f in 0..folds.k {
        let (tr, te) = fold_rows(groups, folds, f)?;
        if tr.is_empty() || te.is_empty() {
            return Err(Error::EmptySplit);
        }
        let xtr = x.select(Axis(0), &tr);
        let ytr: Vec<f64> = tr.iter().map(|&i| y[i]).collect();
        let xte = x.select(Axis(0), &te);
        let yte: Vec<f64> = te.iter().map(|&i| y[i]).collect();
        for (s, m) in sums.iter_mut().zip(standardized_path(xtr.view(), &ytr, grid)?) {
            *s += fold_score(&m.predict(xte.view()), &yte)?;
        }
    }
    let scores: Vec<f64> = sums.iter().map(|s| s / folds.k as f64).collect();
    let best = scores
        .iter()
        .enumerate()
        .fold(0, |best, (i, &s)| if s > scores[best] { i } else { best });
    let best_lambda = grid[best];
    let model = standardized_path(x, y, &[best_lambda])?.remove(0);
    Ok(LassoCv {
        best_lambda,
        scores,
        model,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn one_dimensional_shrinkage() {
        // y = 2x with x centered to mean 0 and (1/n) sum x^2 = 1.25:
        // b = S(2 * 1.25, lambda) / 1.25.
        let x = array![[1.0], [2.0], [3.0], [4.0]];
        let y = [2.0, 4.0, 6.0, 8.0];
        let m = lasso_fit(x.view(), &y, 0.1).unwrap();
        assert!((m.coef[0] - (2.5 - 0.1) / 1.25).abs() < 1e-12);
        assert!((m.intercept - (5.0 - m.coef[0] * 2.5)).abs() < 1e-12);
    }

    #[test]
    fn lambda_max_kills_everything() {
        let x = array![[1.0, 0.3], [2.0, -1.0], [3.0, 0.8], [4.0, 2.0], [0.5, 0.1]];
        let y = [1.0, 0.0, 2.0, 3.5, 0.2];
        let lmax = lambda_max(x.view(), &y).unwrap();
        let m = lasso_fit(x.view(), &y, lmax).unwrap();
        assert_eq!(m.n_nonzero(), 0);
        assert!((m.intercept - 6.7 / 5.0).abs() < 1e-12);
        assert!(lasso_fit(x.view(), &y, lmax * 0.9).unwrap().n_nonzero() > 0);
    }

    #[test]
    fn constant_column_keeps_zero_weight() {
        let x = array![[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]];
        let s = Standardizer::fit(x.view());
        assert_eq!(s.scale[1], 1.0);
        let m = lasso_fit(s.transform(x.view()).view(), &[1.0, 2.0, 3.0], 0.0).unwrap();
        assert_eq!(m.coef[1], 0.0);
    }

    #[test]
    fn bad_inputs() {
        let x = array![[1.0], [f64::NAN]];
        assert!(matches!(lasso_fit(x.view(), &[1.0, 2.0], 0.1), Err(Error::BadInput(_))));
        let x = array![[1.0], [2.0]];
        assert!(matches!(lasso_path(x.view(), &[1.0, 2.0], &[]), Err(Error::Config(_))));
    }

    #[test]
    fn logspace_endpoints() {
        let g = default_lambda_grid();
        assert_eq!(g.len(), 20);
        assert!((g[0] - 1e-4).abs() < 1e-18 && (g[19] - 10.0).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn objective_never_increases_and_kkt_holds(
            vals in prop::collection::vec(-3.0f64..3.0, 60),
            ys in prop::collection::vec(-3.0f64..3.0, 12),
            lambda in 0.001f64..1.0,
        ) {
            let x = Array2::from_shape_vec((12, 5), vals).unwrap();
            let m = lasso_fit(x.view(), &ys, lambda).unwrap();
            prop_assert!(m.converged);
            for w in m.objective.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0));
            }
            prop_assert!(kkt_violation(x.view(), &ys, &m) < 1e-5);
        }
    }
}
