use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::ResponseRecord;
use crate::error::{Error, Result};

/// Two-sided 95% normal quantile.
const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PearsonResult {
    pub r: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: usize,
    /// `100 (r - r_baseline) / r_baseline`; absent without a non-zero baseline.
    pub delta_pct: Option<f64>,
}

/// Sample Pearson correlation.
pub fn pearson_r(pred: &[f64], obs: &[f64]) -> Result<f64> {
    if pred.len() != obs.len() {
        return Err(Error::BadInput(format!("{} predictions for {} observations", pred.len(), obs.len())));
    }
    if pred.len() < 3 {
        return Err(Error::BadInput(format!("correlation needs at least 3 pairs, got {}", pred.len())));
    }
    let n = pred.len() as f64;
    let mp = pred.iter().sum::<f64>() / n;
    let mo = obs.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (p, o) in pred.iter().zip(obs) {
        let (dp, d_o) = (p - mp, o - mo);
        sxy += dp * d_o;
        sxx += dp * dp;
        syy += d_o * d_o;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ConstantPrediction);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Pearson r with a Fisher-z 95% interval.
pub fn pearson_with_ci(pred: &[f64], obs: &[f64], baseline_r: Option<f64>) -> Result<PearsonResult> {
    let r = pearson_r(pred, obs)?;
    let n = pred.len();
    let (ci_low, ci_high) = fisher_ci(r, n);
    Ok(PearsonResult {
        r,
        ci_low,
        ci_high,
        n,
        delta_pct: baseline_r.and_then(|b| delta_pct(r, b)),
    })
}

pub fn fisher_ci(r: f64, n: usize) -> (f64, f64) {
    if n <= 3 {
        return (-1.0, 1.0);
    }
    let z = r.atanh();
    let half = Z_95 / ((n - 3) as f64).sqrt();
    ((z - half).tanh().min(r), (z + half).tanh().max(r))
}

pub fn delta_pct(r: f64, baseline: f64) -> Option<f64> {
    (baseline != 0.0 && baseline.is_finite()).then(|| 100.0 * (r - baseline) / baseline)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselinePrediction {
    pub predictions: Vec<f64>,
    /// Test records whose respondent had no training responses.
    pub n_fallback: usize,
}

/// Predicts each respondent's mean training response; respondents without
/// training responses get the global training mean.
pub fn baseline_predict(train: &[ResponseRecord], test: &[ResponseRecord]) -> Result<BaselinePrediction> {
    if train.is_empty() {
        return Err(Error::EmptySplit);
    }
    let mut sums: HashMap<&str, (f64, usize)> = HashMap::new();
    for r in train {
        let e = sums.entry(&r.respondent_id).or_insert((0.0, 0));
        e.0 += r.response;
        e.1 += 1;
    }
    let global = train.iter().map(|r| r.response).sum::<f64>() / train.len() as f64;
    let mut n_fallback = 0;
    let predictions = test
        .iter()
        .map(|r| match sums.get(r.respondent_id.as_str()) {
            Some(&(s, n)) => s / n as f64,
            None => {
                n_fallback += 1;
                global
            }
        })
        .collect();
    Ok(BaselinePrediction { predictions, n_fallback })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rec(resp: &str, q: &str, v: f64) -> ResponseRecord {
        ResponseRecord {
            respondent_id: resp.into(),
            question_id: q.into(),
            response: v,
        }
    }

    #[test]
    fn pearson_examples() {
        let obs = [0.1, 0.5, 0.2, 0.9];
        assert!((pearson_r(&obs, &obs).unwrap() - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = obs.iter().map(|v| -v).collect();
        assert!((pearson_r(&neg, &obs).unwrap() + 1.0).abs() < 1e-15);
        let r = pearson_r(&[1.0, 2.0, 3.0, 4.0], &[2.0, 1.0, 4.0, 3.0]).unwrap();
        assert!((r - 0.6).abs() < 1e-12);
        assert!(matches!(pearson_r(&[1.0; 4], &obs), Err(Error::ConstantPrediction)));
    }

    #[test]
    fn ci_brackets_r() {
        let res = pearson_with_ci(&[1.0, 2.0, 3.0, 4.0, 5.0], &[1.0, 3.0, 2.0, 5.0, 4.0], Some(0.4)).unwrap();
        assert!(res.ci_low <= res.r && res.r <= res.ci_high);
        assert!((res.delta_pct.unwrap() - 100.0).abs() < 1e-9);
        let reported = delta_pct(0.411, 0.187).unwrap();
        assert!((reported - 119.786).abs() < 1e-3);
    }

    #[test]
    fn baseline_examples() {
        let train = [rec("a", "q1", 0.2), rec("a", "q2", 0.4), rec("b", "q1", 1.0)];
        let test = [rec("a", "q3", 0.9), rec("c", "q3", 0.0)];
        let p = baseline_predict(&train, &test).unwrap();
        assert!((p.predictions[0] - 0.3).abs() < 1e-15);
        assert!((p.predictions[1] - 1.6 / 3.0).abs() < 1e-15);
        assert_eq!(p.n_fallback, 1);
    }

    proptest! {
        #[test]
        fn pearson_affine_invariance(
            pairs in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 3..40),
            a in 0.1f64..10.0,
            b in -10.0f64..10.0,
        ) {
            let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let base = match pearson_r(&x, &y) {
                Ok(r) => r,
                Err(_) => return Ok(()),
            };
            let xs: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            prop_assert!((pearson_r(&xs, &y).unwrap() - base).abs() < 1e-12);
        }
    }
}
