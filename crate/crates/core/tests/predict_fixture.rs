mod common;

use embedval::embed::{EmbeddingSource, SourceKind};
use embedval::predict::{run_predictive_suite, ModelKind, PredictConfig, BASELINE, RESPONDENT_MEAN};

#[test]
fn forest_recovers_background_by_polarity_interaction() {
    let data = common::synthetic_data(40);
    assert_eq!(data.records.len(), 40 * 24);
    let sources = [EmbeddingSource::new("tf", SourceKind::Tf)];
    let report = run_predictive_suite(&data, &sources, &common::background(), &PredictConfig::default(), 11).unwrap();
    eprintln!("{:?}", report.rows);
    assert!(report.diagnostics.is_empty(), "{:?}", report.diagnostics);
    assert_eq!(report.rows[0].representation, BASELINE);
    assert_eq!(report.rows[0].model, RESPONDENT_MEAN);
    let rf = report.get("tf", ModelKind::RandomForest.as_str()).unwrap();
    assert!(rf.r_pooled > 0.99, "rf r = {}", rf.r_pooled);
    assert!(report.rows[0].r_pooled < 0.1);
    for row in &report.rows {
        assert!(row.ci_low <= row.r_pooled && row.r_pooled <= row.ci_high);
    }
}

#[test]
fn suite_is_deterministic() {
    let data = common::synthetic_data(12);
    let sources = [EmbeddingSource::new("tfidf", SourceKind::TfIdf)];
    let config = PredictConfig {
        rf_n_trees: 5,
        inner_k: 2,
        lambda_grid: vec![1e-3, 1e-1],
        rf_min_samples_leaf: vec![2],
        ..PredictConfig::default()
    };
    let a = run_predictive_suite(&data, &sources, &common::background(), &config, 5).unwrap();
    let b = run_predictive_suite(&data, &sources, &common::background(), &config, 5).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.rows.len(), 3);
    let mut buf = Vec::new();
    a.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("representation,model,r_mean,r_pooled,ci_low,ci_high,delta_pct,n_test,seed\n"));
    assert!(text.lines().nth(1).unwrap().starts_with("baseline,respondent_mean,"));
}
