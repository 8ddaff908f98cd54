use std::collections::BTreeSet;
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::design::{build_design, BackgroundEncoder, Design};
use super::folds::{assert_no_leak, grouped_kfold, FoldPlan};
use super::forest::{rf_cv, ForestParams};
use super::lasso::{default_lambda_grid, fold_score, lasso_cv};
use super::metrics::{baseline_predict, delta_pct, pearson_with_ci};
use super::{ResponseRecord, SurveyData};
use crate::corpus::closed_vocabulary;
use crate::embed::EmbeddingSource;
use crate::error::{Error, Result};
use crate::rng::substream;

closed_vocabulary! {
    /// A response model fitted on design rows.
    ModelKind {
        Lasso => "lasso",
        RandomForest => "rf",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PredictConfig {
    pub outer_k: usize,
    pub inner_k: usize,
    pub models: Vec<ModelKind>,
    pub lambda_grid: Vec<f64>,
    pub rf_n_trees: usize,
    pub rf_min_samples_leaf: Vec<usize>,
    pub rf_max_features: f64,
    pub rf_max_depth: Option<usize>,
    pub rf_bootstrap: bool,
}

impl Default for PredictConfig {
    fn default() -> Self {
        PredictConfig {
            outer_k: 10,
            inner_k: 10,
            models: ModelKind::ALL.to_vec(),
            lambda_grid: default_lambda_grid(),
            rf_n_trees: 100,
            rf_min_samples_leaf: vec![1, 5, 20],
            rf_max_features: 1.0 / 3.0,
            rf_max_depth: None,
            rf_bootstrap: true,
        }
    }
}

impl PredictConfig {
    pub fn validate(&self) -> Result<()> {
        if self.outer_k < 2 || self.inner_k < 2 {
            return Err(Error::Config("outer_k and inner_k must be at least 2".into()));
        }
        if self.lambda_grid.is_empty() || self.lambda_grid.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
            return Err(Error::Config("lambda_grid must be a non-empty list of non-negative numbers".into()));
        }
        if self.rf_min_samples_leaf.is_empty() {
            return Err(Error::Config("rf_min_samples_leaf grid is empty".into()));
        }
        for &leaf in &self.rf_min_samples_leaf {
            self.forest_params(leaf, 0).validate()?;
        }
        Ok(())
    }

    fn forest_params(&self, min_samples_leaf: usize, seed: u64) -> ForestParams {
        ForestParams {
            n_trees: self.rf_n_trees,
            min_samples_leaf,
            max_features: self.rf_max_features,
            max_depth: self.rf_max_depth,
            bootstrap: self.rf_bootstrap,
            seed,
        }
    }
}

/// Representation name of the respondent-mean row.
pub const BASELINE: &str = "baseline";
/// Model name of the respondent-mean row.
pub const RESPONDENT_MEAN: &str = "respondent_mean";

/// One line of the predictive-validity table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictRow {
    pub representation: String,
    pub model: String,
    /// Mean of the per-fold correlations.
    pub r_mean: f64,
    /// Correlation over all outer-fold test predictions together.
    pub r_pooled: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Change of `r_mean` relative to the baseline row, in percent.
    pub delta_pct: Option<f64>,
    pub n_test: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PredictReport {
    pub rows: Vec<PredictRow>,
    /// Cells that failed, as `representation/model: reason`.
    pub diagnostics: Vec<String>,
    /// Baseline test records predicted by the global mean.
    pub n_fallback: usize,
}

impl PredictReport {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush().map_err(|e| Error::io("<predict report>", e))
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Vec<PredictRow>> {
        Ok(csv::Reader::from_reader(reader).deserialize().collect::<std::result::Result<_, _>>()?)
    }

    pub fn get(&self, representation: &str, model: &str) -> Option<&PredictRow> {
        self.rows.iter().find(|r| r.representation == representation && r.model == model)
    }
}

pub fn outer_fold_seed(root: u64) -> u64 {
    substream(root, "predict_folds")
}

fn inner_fold_seed(root: u64, fold: usize) -> u64 {
    substream(root, &format!("predict_inner/{fold}"))
}

fn forest_seed(root: u64, fold: usize) -> u64 {
    substream(root, &format!("predict_forest/{fold}"))
}

struct OuterFold {
    train: Vec<ResponseRecord>,
    test: Vec<ResponseRecord>,
}

fn distinct_questions(records: &[ResponseRecord]) -> Vec<&str> {
    records
        .iter()
        .map(|r| r.question_id.as_str())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

fn split_outer(records: &[ResponseRecord], plan: &FoldPlan) -> Result<Vec<OuterFold>> {
    let mut folds: Vec<OuterFold> = (0..plan.k).map(|_| OuterFold { train: Vec::new(), test: Vec::new() }).collect();
    for rec in records {
        let f = plan
            .fold_of(&rec.question_id)
            .ok_or_else(|| Error::InternalInvariant(format!("question {} has no fold", rec.question_id)))?;
        for (g, fold) in folds.iter_mut().enumerate() {
            if g == f {
                fold.test.push(rec.clone());
            } else {
                fold.train.push(rec.clone());
            }
        }
    }
    for fold in &folds {
        assert_no_leak(distinct_questions(&fold.train), distinct_questions(&fold.test))?;
    }
    Ok(folds)
}

/// Summarizes per-fold predictions into a row.
fn summarize(
    representation: &str,
    model: &str,
    folds: &[OuterFold],
    preds: &[Vec<f64>],
    baseline_r: Option<f64>,
    seed: u64,
) -> Result<PredictRow> {
    let mut fold_r = Vec::with_capacity(folds.len());
    let (mut all_pred, mut all_obs) = (Vec::new(), Vec::new());
    for (fold, p) in folds.iter().zip(preds) {
        let obs: Vec<f64> = fold.test.iter().map(|r| r.response).collect();
        fold_r.push(fold_score(p, &obs)?);
        all_pred.extend_from_slice(p);
        all_obs.extend(obs);
    }
    let r_mean = fold_r.iter().sum::<f64>() / fold_r.len() as f64;
    let pooled = pearson_with_ci(&all_pred, &all_obs, None)?;
    Ok(PredictRow {
        representation: representation.to_owned(),
        model: model.to_owned(),
        r_mean,
        r_pooled: pooled.r,
        ci_low: pooled.ci_low,
        ci_high: pooled.ci_high,
        delta_pct: baseline_r.and_then(|b| delta_pct(r_mean, b)),
        n_test: pooled.n,
        seed,
    })
}

struct Context<'a> {
    data: &'a SurveyData,
    encoder: &'a BackgroundEncoder,
    config: &'a PredictConfig,
    seed: u64,
}

impl Context<'_> {
    fn design(&self, records: &[ResponseRecord], source: &crate::embed::FittedSource) -> Result<Design> {
        build_design(records, &self.data.respondents, self.encoder, source, &self.data.question_texts)
    }

    /// Test predictions of one (source, model) cell on outer fold `f`.
    fn run_fold(&self, source: &EmbeddingSource, model: ModelKind, f: usize, fold: &OuterFold) -> Result<Vec<f64>> {
        let train_questions = distinct_questions(&fold.train);
        let texts = train_questions.iter().map(|q| {
            self.data
                .question_texts
                .get(*q)
                .map(String::as_str)
                .ok_or_else(|| Error::Schema(format!("question {q} has no text")))
        });
        let texts = texts.collect::<Result<Vec<_>>>()?;
        let fitted = source.fit(texts)?;
        let train = self.design(&fold.train, &fitted)?;
        let test = self.design(&fold.test, &fitted)?;
        let inner = grouped_kfold(&train_questions, self.config.inner_k, inner_fold_seed(self.seed, f))?;
        let inner_folds = inner.folds();
        for (g, test_q) in inner_folds.iter().enumerate() {
            let train_q = inner_folds.iter().enumerate().filter(|(h, _)| *h != g).flat_map(|(_, v)| v.iter().copied());
            assert_no_leak(train_q, test_q.iter().copied())?;
        }
        match model {
            ModelKind::Lasso => {
                let cv = lasso_cv(train.x.view(), &train.y, &train.question_ids, &inner, &self.config.lambda_grid)?;
                log::debug!("{}/lasso fold {f}: lambda {}", source.name, cv.best_lambda);
                Ok(cv.model.predict(test.x.view()))
            }
            ModelKind::RandomForest => {
                let base = self.config.forest_params(1, forest_seed(self.seed, f));
                let cv = rf_cv(
                    train.x.view(),
                    &train.y,
                    &train.question_ids,
                    &inner,
                    &base,
                    &self.config.rf_min_samples_leaf,
                )?;
                log::debug!("{}/rf fold {f}: min_samples_leaf {}", source.name, cv.best_min_samples_leaf);
                Ok(cv.forest.predict(test.x.view()))
            }
        }
    }
}

/// Grouped nested cross-validation of every (source, model) cell against
/// the respondent-mean baseline. Sources are refitted on each outer
/// training set; inner folds reuse that fit. The baseline row comes first,
/// then sources in the given order with models in configured order. A cell
/// that fails on any fold is reported in `diagnostics` instead of a row.
pub fn run_predictive_suite(
    data: &SurveyData,
    sources: &[EmbeddingSource],
    background: &[String],
    config: &PredictConfig,
    seed: u64,
) -> Result<PredictReport> {
    config.validate()?;
    if data.records.is_empty() {
        return Err(Error::EmptySplit);
    }
    let encoder = BackgroundEncoder::fit(&data.respondents, background)?;
    let plan = grouped_kfold(&distinct_questions(&data.records), config.outer_k, outer_fold_seed(seed))?;
    plan.validate()?;
    let folds = split_outer(&data.records, &plan)?;

    let mut n_fallback = 0;
    let mut baseline_preds = Vec::with_capacity(folds.len());
    for fold in &folds {
        let p = baseline_predict(&fold.train, &fold.test)?;
        n_fallback += p.n_fallback;
        baseline_preds.push(p.predictions);
    }
    let baseline = summarize(BASELINE, RESPONDENT_MEAN, &folds, &baseline_preds, None, seed)?;

    let ctx = Context {
        data,
        encoder: &encoder,
        config,
        seed,
    };
    let cells: Vec<(usize, ModelKind)> = (0..sources.len())
        .flat_map(|s| config.models.iter().map(move |&m| (s, m)))
        .collect();
    let jobs: Vec<(usize, usize)> = (0..cells.len()).flat_map(|c| (0..folds.len()).map(move |f| (c, f))).collect();
    let results: Vec<Result<Vec<f64>>> = jobs
        .par_iter()
        .map(|&(c, f)| {
            let (s, m) = cells[c];
            ctx.run_fold(&sources[s], m, f, &folds[f])
        })
        .collect();

    let mut report = PredictReport {
        rows: vec![baseline.clone()],
        diagnostics: Vec::new(),
        n_fallback,
    };
    let mut results = results.into_iter();
    for &(s, m) in &cells {
        let name = &sources[s].name;
        let cell: Result<Vec<Vec<f64>>> = results.by_ref().take(folds.len()).collect();
        match cell.and_then(|preds| summarize(name, m.as_str(), &folds, &preds, Some(baseline.r_mean), seed)) {
            Ok(row) => report.rows.push(row),
            Err(e) => {
                log::warn!("{name}/{m}: {e}");
                report.diagnostics.push(format!("{name}/{m}: {e}"));
            }
        }
    }
    Ok(report)
}
