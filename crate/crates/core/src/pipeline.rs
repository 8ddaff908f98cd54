//! Orchestration behind the command-line subcommands.

use std::collections::{BTreeMap, HashSet};
use std::path::PathBuf;
use std::sync::Arc;

use crate::config::{Analysis, RepresentationKind, RepresentationSpec, RunConfig};
use crate::corpus::{generate_corpus, load_corpus, tokenize_lenient, SurveyQuestion, Taxonomy, TemplateTable};
use crate::embed::{load_sentence_embeddings, load_word_vectors_filtered, EmbeddingSource, SourceKind};
use crate::error::Result;
use crate::predict::{load_survey, run_predictive_suite, SurveyData};
use crate::probe::run_probe_suite;
use crate::report::{Diagnostics, RunMetadata, ValidityReport};
use crate::rng::substream;
use crate::simdiff::run_simdiff;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    GenCorpus,
    Probe,
    Simdiff,
    Predict,
    All,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::GenCorpus => "gen-corpus",
            Command::Probe => "probe",
            Command::Simdiff => "simdiff",
            Command::Predict => "predict",
            Command::All => "all",
        }
    }

    /// Analyses this command runs under `config`'s toggles.
    pub fn analyses(self, config: &RunConfig) -> Vec<Analysis> {
        match self {
            Command::GenCorpus => Vec::new(),
            Command::Probe => vec![Analysis::Probe],
            Command::Simdiff => vec![Analysis::Simdiff],
            Command::Predict => vec![Analysis::Predict],
            Command::All => Analysis::ALL.iter().copied().filter(|a| config.analyses.enabled(*a)).collect(),
        }
    }
}

pub fn corpus_seed(root: u64) -> u64 {
    substream(root, "corpus")
}

/// Loads the configured corpus file or generates one.
pub fn build_corpus(config: &RunConfig) -> Result<Vec<SurveyQuestion>> {
    if let Some(path) = &config.corpus.path {
        return load_corpus(path);
    }
    let templates = match &config.corpus.templates {
        Some(p) => TemplateTable::from_path(p)?,
        None => TemplateTable::shipped(),
    };
    let taxonomy = match &config.corpus.taxonomy {
        Some(p) => Taxonomy::from_path(p)?,
        None => Taxonomy::shipped(),
    };
    generate_corpus(&taxonomy, &templates, corpus_seed(config.seed))
}

/// Default seed of a random representation without an explicit one.
pub fn representation_seed(root: u64, name: &str) -> u64 {
    substream(root, &format!("representation/{name}"))
}

/// Loads each file-backed representation once and builds the sources.
/// Word-vector files keep only words in `vocabulary`.
struct SourceCache {
    root_seed: u64,
    vocabulary: HashSet<String>,
    loaded: BTreeMap<(PathBuf, bool), SourceKind>,
}

impl SourceCache {
    fn source(&mut self, spec: &RepresentationSpec) -> Result<EmbeddingSource> {
        let kind = match spec.kind {
            RepresentationKind::Tf => SourceKind::Tf,
            RepresentationKind::TfIdf => SourceKind::TfIdf,
            RepresentationKind::Random => SourceKind::Random {
                dim: spec.dim.unwrap_or_default(),
                seed: spec.seed.unwrap_or_else(|| representation_seed(self.root_seed, &spec.name)),
            },
            RepresentationKind::WordVectors | RepresentationKind::SentenceEmbeddings => {
                let path = spec.path.clone().unwrap_or_default();
                let is_wv = spec.kind == RepresentationKind::WordVectors;
                let key = (path.clone(), is_wv);
                if let Some(k) = self.loaded.get(&key) {
                    k.clone()
                } else {
                    log::info!("loading {} for {}", path.display(), spec.name);
                    let k = if is_wv {
                        SourceKind::WordVectors(Arc::new(load_word_vectors_filtered(&path, Some(&self.vocabulary))?))
                    } else {
                        SourceKind::Precomputed(Arc::new(load_sentence_embeddings(&path)?))
                    };
                    self.loaded.insert(key, k.clone());
                    k
                }
            }
        };
        Ok(EmbeddingSource::new(spec.name.clone(), kind))
    }
}

/// Runs `command`, writes its files to `config.out_dir` and returns the
/// report. The config is validated before anything is read.
pub fn run(command: Command, config: &RunConfig) -> Result<ValidityReport> {
    let mut config = config.clone();
    match command {
        Command::Probe => config.analyses.probe = true,
        Command::Simdiff => config.analyses.simdiff = true,
        Command::Predict => config.analyses.predict = true,
        Command::GenCorpus | Command::All => {}
    }
    config.validate()?;
    let analyses = command.analyses(&config);

    let needs_corpus = command == Command::GenCorpus || analyses.iter().any(|a| *a != Analysis::Predict);
    let corpus = if needs_corpus {
        log::info!("building corpus");
        Some(build_corpus(&config)?)
    } else {
        None
    };
    let survey: Option<SurveyData> = if analyses.contains(&Analysis::Predict) {
        let s = config.survey.as_ref().expect("validated");
        log::info!("reading survey {}", s.responses.display());
        Some(load_survey(&s.responses, &s.questions, &s.scales, &s.ingest_options())?)
    } else {
        None
    };

    let mut vocabulary = HashSet::new();
    for q in corpus.iter().flatten() {
        vocabulary.extend(tokenize_lenient(&q.text));
    }
    for text in survey.iter().flat_map(|s| s.question_texts.values()) {
        vocabulary.extend(tokenize_lenient(text));
    }
    let mut cache = SourceCache {
        root_seed: config.seed,
        vocabulary,
        loaded: BTreeMap::new(),
    };
    let mut sources = |a: Analysis| -> Result<Vec<EmbeddingSource>> {
        config.representations_for(a).map(|spec| cache.source(spec)).collect()
    };

    let mut report = ValidityReport {
        metadata: RunMetadata::new(command.name(), &config)?,
        corpus: None,
        probe: None,
        simdiff: None,
        predict: None,
        diagnostics: Diagnostics::default(),
    };
    for analysis in analyses {
        let src = sources(analysis)?;
        match analysis {
            Analysis::Probe => {
                log::info!("probing {} representations", src.len());
                let corpus = corpus.as_deref().expect("corpus built for probe");
                report.probe = Some(run_probe_suite(corpus, &src, &config.probe, substream(config.seed, "probe"))?);
            }
            Analysis::Simdiff => {
                log::info!("scoring similarity differences for {} representations", src.len());
                report.simdiff = Some(run_simdiff(corpus.as_deref().expect("corpus built for simdiff"), &src)?);
            }
            Analysis::Predict => {
                let data = survey.as_ref().expect("survey read for predict");
                let background = &config.survey.as_ref().expect("validated").background;
                log::info!("cross-validating {} representations on {} responses", src.len(), data.records.len());
                let p = run_predictive_suite(data, &src, background, &config.predict, substream(config.seed, "predict"))?;
                report.diagnostics.predict_failed_cells = p.diagnostics.clone();
                report.diagnostics.predict_baseline_fallbacks = p.n_fallback;
                report.diagnostics.survey_dropped_cells = data.n_dropped;
                report.predict = Some(p);
            }
        }
    }
    if matches!(command, Command::GenCorpus | Command::All) {
        report.corpus = corpus;
    }
    let written = report.write_to(&config.out_dir)?;
    log::info!("wrote {} files to {}", written.len(), config.out_dir.display());
    Ok(report)
}
