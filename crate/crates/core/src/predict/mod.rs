//! Predictive validity: respondents' answers to held-out questions are
//! predicted from their background and the question representation.

mod design;
mod folds;
mod forest;
mod lasso;
mod metrics;
mod suite;
mod survey;

pub use design::{build_design, BackgroundEncoder, Design, DesignRow};
pub use folds::{assert_no_leak, grouped_kfold, FoldPlan};
pub use forest::{rf_cv, rf_fit, tree_fit, ForestCv, ForestParams, RandomForest, RegressionTree};
pub use lasso::{
    default_lambda_grid, kkt_violation, lambda_max, lasso_cv, lasso_fit, lasso_path, logspace, LassoCv, LassoModel,
    Standardizer, StandardizedLasso, LASSO_TOL,
};
pub use metrics::{baseline_predict, delta_pct, fisher_ci, pearson_r, pearson_with_ci, BaselinePrediction, PearsonResult};
pub use suite::{
    outer_fold_seed, run_predictive_suite, ModelKind, PredictConfig, PredictReport, PredictRow, BASELINE, RESPONDENT_MEAN,
};
pub use survey::{
    ingest_survey, load_survey, read_question_texts, read_scale_table, rescale, IngestOptions, Respondent, ResponseRecord,
    SurveyData, MISSING,
};
