use std::collections::{BTreeSet, HashMap};
use std::io::{Read, Write};

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{evaluate_probe, majority_baseline, make_controlled_split, train_probe, ProbeParams, ProbeTarget, SplitPlan};
use crate::corpus::SurveyQuestion;
use crate::embed::{EmbeddingSource, FittedSource, SourceKind};
use crate::error::{Error, Result};
use crate::rng::substream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    pub targets: Vec<ProbeTarget>,
    /// Dimensions of the standalone random-embedding baseline rows.
    pub random_dims: Vec<usize>,
    pub l2: f64,
    pub lr: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl ProbeConfig {
    pub fn params(&self) -> ProbeParams {
        ProbeParams {
            l2: self.l2,
            lr: self.lr,
            max_iter: self.max_iter,
            tol: self.tol,
        }
    }
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            targets: ProbeTarget::ALL.to_vec(),
            random_dims: vec![300, 768, 1024],
            l2: ProbeParams::default().l2,
            lr: ProbeParams::default().lr,
            max_iter: ProbeParams::default().max_iter,
            tol: ProbeParams::default().tol,
        }
    }
}

/// One line of the content-validity table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub representation: String,
    pub target: ProbeTarget,
    pub accuracy: f64,
    pub majority_accuracy: f64,
    /// Random embeddings of the same dimension on the same split; empty on
    /// the majority row.
    pub random_accuracy: Option<f64>,
    pub n_train: usize,
    pub n_test: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProbeReport {
    pub rows: Vec<ProbeRow>,
}

impl ProbeReport {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush().map_err(|e| Error::io("<probe report>", e))
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let rows = csv::Reader::from_reader(reader).deserialize().collect::<std::result::Result<_, _>>()?;
        Ok(ProbeReport { rows })
    }

    pub fn get(&self, representation: &str, target: ProbeTarget) -> Option<&ProbeRow> {
        self.rows.iter().find(|r| r.representation == representation && r.target == target)
    }
}

/// Seed of the random-embedding baselines for a run.
pub fn random_baseline_seed(root: u64) -> u64 {
    substream(root, "random_embeddings")
}

fn split_seed(root: u64, target: ProbeTarget) -> u64 {
    substream(root, &format!("probe_split/{target}"))
}

enum Job {
    Source(usize, usize),
    Random(usize, usize),
}

/// Probes every (target, source) cell. For each target the rows are the
/// majority baseline, one random baseline per configured dimension, then
/// the sources in the given order.
pub fn run_probe_suite(
    corpus: &[SurveyQuestion],
    sources: &[EmbeddingSource],
    config: &ProbeConfig,
    seed: u64,
) -> Result<ProbeReport> {
    let by_id: HashMap<&str, &SurveyQuestion> = corpus.iter().map(|q| (q.id.as_str(), q)).collect();
    let mut plans = Vec::new();
    for &target in &config.targets {
        let plan = make_controlled_split(corpus, target, split_seed(seed, target))?;
        plan.validate(corpus)?;
        plans.push(plan);
    }

    // Fit every source on each training side; dimensions decide which
    // random baselines are needed.
    let mut fitted: Vec<Vec<FittedSource>> = Vec::new();
    let mut dims: Vec<BTreeSet<usize>> = Vec::new();
    for plan in &plans {
        let texts: Vec<&str> = plan.train_ids.iter().map(|id| by_id[id.as_str()].text.as_str()).collect();
        let row = sources.iter().map(|s| s.fit(texts.iter().copied())).collect::<Result<Vec<_>>>()?;
        let mut d: BTreeSet<usize> = config.random_dims.iter().copied().collect();
        d.extend(row.iter().map(FittedSource::dim));
        dims.push(d);
        fitted.push(row);
    }
    let random_seed = random_baseline_seed(seed);
    let params = config.params();
    let mut jobs = Vec::new();
    for (t, d) in dims.iter().enumerate() {
        jobs.extend(d.iter().map(|&dim| Job::Random(t, dim)));
        jobs.extend((0..sources.len()).map(|s| Job::Source(t, s)));
    }
    let results: Vec<Result<f64>> = jobs
        .par_iter()
        .map(|job| match *job {
            Job::Source(t, s) => probe_accuracy(&by_id, &plans[t], &fitted[t][s], &params),
            Job::Random(t, dim) => {
                let texts = plans[t].train_ids.iter().map(|id| by_id[id.as_str()].text.as_str());
                let source = EmbeddingSource::new(format!("random{dim}"), SourceKind::Random { dim, seed: random_seed });
                probe_accuracy(&by_id, &plans[t], &source.fit(texts)?, &params)
            }
        })
        .collect();
    let mut random_acc: HashMap<(usize, usize), f64> = HashMap::new();
    let mut source_acc: HashMap<(usize, usize), f64> = HashMap::new();
    for (job, res) in jobs.iter().zip(results) {
        match *job {
            Job::Random(t, dim) => random_acc.insert((t, dim), res?),
            Job::Source(t, s) => source_acc.insert((t, s), res?),
        };
    }

    let mut report = ProbeReport::default();
    for (t, plan) in plans.iter().enumerate() {
        let label = |ids: &[String]| -> Vec<String> { ids.iter().map(|id| plan.target.label(by_id[id.as_str()])).collect() };
        let majority = majority_baseline(&label(&plan.train_ids), &label(&plan.test_ids))?;
        let row = |representation: String, accuracy: f64, random_accuracy: Option<f64>| ProbeRow {
            representation,
            target: plan.target,
            accuracy,
            majority_accuracy: majority,
            random_accuracy,
            n_train: plan.train_ids.len(),
            n_test: plan.test_ids.len(),
            seed,
        };
        report.rows.push(row("majority".into(), majority, None));
        for &dim in &config.random_dims {
            let acc = random_acc[&(t, dim)];
            report.rows.push(row(format!("random{dim}"), acc, Some(acc)));
        }
        for (s, source) in sources.iter().enumerate() {
            let random = random_acc[&(t, fitted[t][s].dim())];
            report.rows.push(row(source.name.clone(), source_acc[&(t, s)], Some(random)));
        }
    }
    Ok(report)
}

fn design(by_id: &HashMap<&str, &SurveyQuestion>, ids: &[String], source: &FittedSource) -> Result<Array2<f64>> {
    let mut x = Array2::zeros((ids.len(), source.dim()));
    for (mut row, id) in x.rows_mut().into_iter().zip(ids) {
        let v = source.embed(id, &by_id[id.as_str()].text)?;
        if v.dim() != source.dim() {
            return Err(Error::DimensionMismatch {
                left: source.dim(),
                right: v.dim(),
            });
        }
        row.assign(&ndarray::ArrayView1::from(v.values()));
    }
    Ok(x)
}

fn probe_accuracy(
    by_id: &HashMap<&str, &SurveyQuestion>,
    plan: &SplitPlan,
    source: &FittedSource,
    params: &ProbeParams,
) -> Result<f64> {
    let labels = |ids: &[String]| -> Vec<String> { ids.iter().map(|id| plan.target.label(by_id[id.as_str()])).collect() };
    let x_train = design(by_id, &plan.train_ids, source)?;
    let x_test = design(by_id, &plan.test_ids, source)?;
    let model = train_probe(x_train.view(), &labels(&plan.train_ids), params)?;
    log::debug!(
        "probe {} on {}: {} steps, loss {:.6}",
        plan.target,
        source.name(),
        model.log.iterations,
        model.log.final_loss
    );
    evaluate_probe(&model, x_test.view(), &labels(&plan.test_ids))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate_corpus, Taxonomy, TemplateTable};

    fn quick() -> ProbeConfig {
        ProbeConfig {
            targets: vec![ProbeTarget::Formulation, ProbeTarget::ConcreteGroup],
            random_dims: vec![16],
            max_iter: 50,
            ..Default::default()
        }
    }

    #[test]
    fn report_layout_and_self_baseline() {
        let corpus = generate_corpus(&Taxonomy::shipped(), &TemplateTable::shipped(), 0).unwrap();
        let seed = 4;
        let sources = vec![
            EmbeddingSource::new("tf", SourceKind::Tf),
            EmbeddingSource::new(
                "random16_self",
                SourceKind::Random {
                    dim: 16,
                    seed: random_baseline_seed(seed),
                },
            ),
        ];
        let report = run_probe_suite(&corpus, &sources, &quick(), seed).unwrap();
        assert_eq!(report.rows.len(), 2 * (1 + 1 + 2));
        assert_eq!(report.rows[0].representation, "majority");
        let own = report.get("random16_self", ProbeTarget::Formulation).unwrap();
        assert_eq!(own.accuracy - own.random_accuracy.unwrap(), 0.0);

        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        let header = String::from_utf8(buf.clone()).unwrap();
        assert!(header.starts_with(
            "representation,target,accuracy,majority_accuracy,random_accuracy,n_train,n_test,seed\n"
        ));
        assert_eq!(ProbeReport::read_csv(buf.as_slice()).unwrap(), report);
    }

    #[test]
    fn missing_precomputed_embedding_is_reported() {
        let corpus = generate_corpus(&Taxonomy::shipped(), &TemplateTable::shipped(), 0).unwrap();
        let store = crate::embed::read_sentence_embeddings(
            r#"{"id": "nope", "model": "m", "dim": 2, "vector": [1, 2]}"#.as_bytes(),
        )
        .unwrap();
        let sources = vec![EmbeddingSource::new("enc", SourceKind::Precomputed(std::sync::Arc::new(store)))];
        let err = run_probe_suite(&corpus, &sources, &quick(), 0).unwrap_err();
        assert!(matches!(err, Error::MissingEmbedding { source_name, .. } if source_name == "enc"));
    }
}
