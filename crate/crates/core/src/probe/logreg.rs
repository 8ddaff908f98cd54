use std::collections::{BTreeMap, BTreeSet};

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gradient-descent settings for the probing classifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeParams {
    pub l2: f64,
    pub lr: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for ProbeParams {
    fn default() -> Self {
        ProbeParams {
            l2: 1e-4,
            lr: 0.5,
            max_iter: 5000,
            tol: 1e-7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    /// Accepted gradient steps.
    pub iterations: usize,
    /// Steps rejected and retried at half the learning rate.
    pub halvings: usize,
    pub final_loss: f64,
    /// Whether the loss improvement fell below `tol` before `max_iter`.
    pub converged: bool,
    /// Loss after each accepted step, starting with the initial loss.
    pub losses: Vec<f64>,
}

/// Softmax regression: `p(k | x) ∝ exp(w_k · x + b_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultinomialModel {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    pub categories: Vec<String>,
    pub l2: f64,
    pub log: TrainingLog,
}

/// Mean cross-entropy plus `(l2 / 2) ||W||²` and its gradient with respect
/// to the weights (K x d) and the unpenalized bias (K).
pub fn loss_and_gradient(
    x: ArrayView2<f64>,
    y: &[usize],
    weights: ArrayView2<f64>,
    bias: ArrayView1<f64>,
    l2: f64,
) -> (f64, Array2<f64>, Array1<f64>) {
    let n = x.nrows() as f64;
    let mut probs = x.dot(&weights.t()) + &bias;
    let mut loss = 0.0;
    for (mut row, &label) in probs.axis_iter_mut(Axis(0)).zip(y) {
        let lse = log_sum_exp(row.view());
        loss += lse - row[label];
        row.mapv_inplace(|v| (v - lse).exp());
        row[label] -= 1.0;
    }
    let penalty = 0.5 * l2 * weights.iter().map(|w| w * w).sum::<f64>();
    let grad_w = probs.t().dot(&x) / n + &(&weights * l2);
    let grad_b = probs.sum_axis(Axis(0)) / n;
    (loss / n + penalty, grad_w, grad_b)
}

fn log_sum_exp(row: ArrayView1<f64>) -> f64 {
    let m = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    m + row.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// Full-batch gradient descent; a step that raises the loss is retried at
/// half the learning rate. The penalty enters each step implicitly, which
/// keeps steps stable when `l2` is large.
pub fn train_probe(x: ArrayView2<f64>, y: &[String], params: &ProbeParams) -> Result<MultinomialModel> {
    if x.nrows() != y.len() {
        return Err(Error::BadInput(format!("{} rows but {} labels", x.nrows(), y.len())));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::BadInput("non-finite feature value".into()));
    }
    let categories: Vec<String> = y.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    if categories.len() < 2 {
        return Err(Error::DegenerateLabels);
    }
    let index: BTreeMap<&str, usize> = categories.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
    let y_idx: Vec<usize> = y.iter().map(|c| index[c.as_str()]).collect();

    let (k, d) = (categories.len(), x.ncols());
    let mut w = Array2::<f64>::zeros((k, d));
    let mut b = Array1::<f64>::zeros(k);
    let (mut loss, mut gw, mut gb) = loss_and_gradient(x, &y_idx, w.view(), b.view(), params.l2);
    if !loss.is_finite() {
        return Err(Error::DivergedTraining(format!("initial loss {loss}")));
    }
    let mut log = TrainingLog {
        iterations: 0,
        halvings: 0,
        final_loss: loss,
        converged: false,
        losses: vec![loss],
    };
    let mut lr = params.lr;
    while log.iterations < params.max_iter {
        // Cross-entropy step on W, then the exact shrink for the L2 term.
        let w_new = (&w * (1.0 + lr * params.l2) - &(&gw * lr)) / (1.0 + lr * params.l2);
        let b_new = &b - &(&gb * lr);
        let (l_new, gw_new, gb_new) = loss_and_gradient(x, &y_idx, w_new.view(), b_new.view(), params.l2);
        if !(l_new <= loss) {
            lr *= 0.5;
            log.halvings += 1;
            if lr < f64::EPSILON * params.lr {
                // No descent direction left at machine precision.
                log.converged = true;
                break;
            }
            continue;
        }
        let improvement = loss - l_new;
        (w, b, loss, gw, gb) = (w_new, b_new, l_new, gw_new, gb_new);
        log.iterations += 1;
        log.losses.push(loss);
        if improvement < params.tol {
            log.converged = true;
            break;
        }
    }
    if !loss.is_finite() {
        return Err(Error::DivergedTraining(format!("loss {loss} after {} steps", log.iterations)));
    }
    log.final_loss = loss;
    Ok(MultinomialModel {
        weights: w,
        bias: b,
        categories,
        l2: params.l2,
        log,
    })
}

impl MultinomialModel {
    pub fn logits(&self, x: ArrayView2<f64>) -> Array2<f64> {
        x.dot(&self.weights.t()) + &self.bias
    }

    /// Row-wise softmax probabilities.
    pub fn predict_proba(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let mut z = self.logits(x);
        for mut row in z.axis_iter_mut(Axis(0)) {
            let lse = log_sum_exp(row.view());
            row.mapv_inplace(|v| (v - lse).exp());
        }
        z
    }

    /// Argmax category per row; ties go to the earliest category.
    pub fn predict(&self, x: ArrayView2<f64>) -> Vec<&str> {
        self.logits(x)
            .axis_iter(Axis(0))
            .map(|row| {
                let mut best = 0;
                for (j, &v) in row.iter().enumerate() {
                    if v > row[best] {
                        best = j;
                    }
                }
                self.categories[best].as_str()
            })
            .collect()
    }
}

/// Fraction of rows whose predicted category equals the label. Labels the
/// model never saw count as wrong.
pub fn evaluate_probe(model: &MultinomialModel, x: ArrayView2<f64>, y: &[String]) -> Result<f64> {
    if y.is_empty() {
        return Err(Error::EmptySplit);
    }
    if x.nrows() != y.len() {
        return Err(Error::BadInput(format!("{} rows but {} labels", x.nrows(), y.len())));
    }
    let hits = model.predict(x).iter().zip(y).filter(|(p, t)| **p == t.as_str()).count();
    Ok(hits as f64 / y.len() as f64)
}

/// Accuracy of always predicting the most frequent training label; ties go
/// to the lexicographically first label.
pub fn majority_baseline(train: &[String], test: &[String]) -> Result<f64> {
    if train.is_empty() || test.is_empty() {
        return Err(Error::EmptySplit);
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for l in train {
        *counts.entry(l).or_insert(0) += 1;
    }
    let mut best = ("", 0);
    for (label, n) in counts {
        if n > best.1 {
            best = (label, n);
        }
    }
    Ok(test.iter().filter(|l| l.as_str() == best.0).count() as f64 / test.len() as f64)
}
