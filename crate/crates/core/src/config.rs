//! Run configuration, read from a TOML document.
//!
//! ```toml
//! seed = 42
//! out_dir = "out"
//!
//! [analyses]
//! predict = true
//!
//! [[representation]]
//! name = "glove"
//! kind = "word_vectors"
//! path = "glove.6B.300d.txt"
//!
//! [survey]
//! responses = "ess_responses.csv"
//! questions = "ess_questions.csv"
//! scales = "ess_scales.csv"
//! ```
//!
//! Relative paths are resolved against the directory holding the config
//! file.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::closed_vocabulary;
use crate::error::{Error, Result};
use crate::predict::{IngestOptions, PredictConfig};
use crate::probe::ProbeConfig;

closed_vocabulary! {
    /// One of the three validity analyses.
    Analysis {
        Probe => "probe",
        Simdiff => "simdiff",
        Predict => "predict",
    }
}

closed_vocabulary! {
    RepresentationKind {
        Tf => "tf",
        TfIdf => "tfidf",
        Random => "random",
        WordVectors => "word_vectors",
        SentenceEmbeddings => "sentence_embeddings",
    }
}

/// One entry of the representation manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepresentationSpec {
    pub name: String,
    pub kind: RepresentationKind,
    /// Word-vector or sentence-embedding file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    /// Dimension of random embeddings.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    /// Seed of random embeddings; derived from the run seed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Analyses that use this representation; all when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analyses: Option<Vec<Analysis>>,
}

impl RepresentationSpec {
    pub fn used_in(&self, analysis: Analysis) -> bool {
        self.analyses.as_ref().is_none_or(|a| a.contains(&analysis))
    }

    fn validate(&self) -> Result<()> {
        let ctx = |msg: &str| Error::Config(format!("representation {:?}: {msg}", self.name));
        let needs_path = matches!(self.kind, RepresentationKind::WordVectors | RepresentationKind::SentenceEmbeddings);
        match (&self.path, needs_path) {
            (None, true) => return Err(ctx("a path is required")),
            (Some(_), false) => return Err(ctx("path is only used by word_vectors and sentence_embeddings")),
            (Some(p), true) if !p.is_file() => return Err(ctx(&format!("{} is not a readable file", p.display()))),
            _ => {}
        }
        match (self.kind, self.dim) {
            (RepresentationKind::Random, None | Some(0)) => return Err(ctx("random needs a positive dim")),
            (RepresentationKind::Random, Some(_)) => {}
            (_, Some(_)) => return Err(ctx("dim is only used by random")),
            _ => {}
        }
        if self.seed.is_some() && self.kind != RepresentationKind::Random {
            return Err(ctx("seed is only used by random"));
        }
        Ok(())
    }
}

/// Where the question corpus comes from: a CSV file, or generated from
/// template and taxonomy tables (the shipped ones by default).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub templates: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub taxonomy: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisToggles {
    pub probe: bool,
    pub simdiff: bool,
    pub predict: bool,
}

impl Default for AnalysisToggles {
    fn default() -> Self {
        AnalysisToggles {
            probe: true,
            simdiff: true,
            predict: false,
        }
    }
}

impl AnalysisToggles {
    pub fn enabled(&self, a: Analysis) -> bool {
        match a {
            Analysis::Probe => self.probe,
            Analysis::Simdiff => self.simdiff,
            Analysis::Predict => self.predict,
        }
    }
}

/// Survey files for the predictive analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurveyConfig {
    pub responses: PathBuf,
    pub questions: PathBuf,
    pub scales: PathBuf,
    #[serde(default = "default_id_column")]
    pub id_column: String,
    /// Background variables to one-hot encode; an empty list disables them.
    #[serde(default = "default_background")]
    pub background: Vec<String>,
    #[serde(default = "default_missing_codes")]
    pub missing_codes: Vec<f64>,
}

fn default_id_column() -> String {
    IngestOptions::default().id_column
}

fn default_background() -> Vec<String> {
    IngestOptions::default().background
}

fn default_missing_codes() -> Vec<f64> {
    IngestOptions::default().missing_codes
}

impl SurveyConfig {
    pub fn ingest_options(&self) -> IngestOptions {
        IngestOptions {
            id_column: self.id_column.clone(),
            background: self.background.clone(),
            missing_codes: self.missing_codes.clone(),
        }
    }
}

fn default_manifest() -> Vec<RepresentationSpec> {
    [("tf", RepresentationKind::Tf), ("tfidf", RepresentationKind::TfIdf)]
        .into_iter()
        .map(|(name, kind)| RepresentationSpec {
            name: name.into(),
            kind,
            path: None,
            dim: None,
            seed: None,
            analyses: None,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub corpus: CorpusConfig,
    #[serde(rename = "representation")]
    pub representations: Vec<RepresentationSpec>,
    pub analyses: AnalysisToggles,
    pub probe: ProbeConfig,
    pub predict: PredictConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub survey: Option<SurveyConfig>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            out_dir: PathBuf::from("out"),
            corpus: CorpusConfig::default(),
            representations: default_manifest(),
            analyses: AnalysisToggles::default(),
            probe: ProbeConfig::default(),
            predict: PredictConfig::default(),
            survey: None,
        }
    }
}

impl RunConfig {
    /// Reads a config file and resolves its relative paths against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base)
    }

    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.resolve_paths(base_dir);
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.out_dir);
        for p in [&mut self.corpus.path, &mut self.corpus.templates, &mut self.corpus.taxonomy]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
        for r in &mut self.representations {
            if let Some(p) = &mut r.path {
                fix(p);
            }
        }
        if let Some(s) = &mut self.survey {
            fix(&mut s.responses);
            fix(&mut s.questions);
            fix(&mut s.scales);
        }
    }

    /// Keeps only the named representations, in manifest order.
    pub fn retain_representations(&mut self, names: &[String]) -> Result<()> {
        let known: BTreeSet<&str> = self.representations.iter().map(|r| r.name.as_str()).collect();
        if let Some(missing) = names.iter().find(|n| !known.contains(n.as_str())) {
            return Err(Error::Config(format!("--reps names unknown representation {missing:?}")));
        }
        self.representations.retain(|r| names.contains(&r.name));
        Ok(())
    }

    pub fn representations_for(&self, analysis: Analysis) -> impl Iterator<Item = &RepresentationSpec> {
        self.representations.iter().filter(move |r| r.used_in(analysis))
    }

    /// Checks everything that can be checked without reading data: names,
    /// kinds, files, grids and the inputs of every enabled analysis.
    pub fn validate(&self) -> Result<()> {
        let mut names = BTreeSet::new();
        for r in &self.representations {
            if r.name.trim().is_empty() {
                return Err(Error::Config("representation with an empty name".into()));
            }
            if !names.insert(r.name.as_str()) {
                return Err(Error::Config(format!("representation name {:?} is used twice", r.name)));
            }
            r.validate()?;
        }
        for p in [&self.corpus.path, &self.corpus.templates, &self.corpus.taxonomy]
            .into_iter()
            .flatten()
        {
            if !p.is_file() {
                return Err(Error::Config(format!("corpus input {} is not a readable file", p.display())));
            }
        }
        if self.corpus.path.is_some() && (self.corpus.templates.is_some() || self.corpus.taxonomy.is_some()) {
            return Err(Error::Config("corpus.path excludes corpus.templates and corpus.taxonomy".into()));
        }
        if self.probe.targets.is_empty() {
            return Err(Error::Config("probe.targets is empty".into()));
        }
        if self.probe.random_dims.contains(&0) {
            return Err(Error::Config("probe.random_dims must be positive".into()));
        }
        let p = self.probe.params();
        if !(p.l2 >= 0.0 && p.lr > 0.0 && p.tol >= 0.0 && p.max_iter > 0) {
            return Err(Error::Config("probe needs l2 >= 0, lr > 0, tol >= 0 and max_iter > 0".into()));
        }
        self.predict.validate()?;
        if self.analyses.predict {
            let survey = self
                .survey
                .as_ref()
                .ok_or_else(|| Error::Config("the predict analysis needs a [survey] section".into()))?;
            for p in [&survey.responses, &survey.questions, &survey.scales] {
                if !p.is_file() {
                    return Err(Error::Config(format!("survey input {} is not a readable file", p.display())));
                }
            }
            if self.representations_for(Analysis::Predict).next().is_none() {
                return Err(Error::Config("no representation is used by predict".into()));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let cfg = RunConfig::from_toml("", Path::new("/tmp")).unwrap();
        assert_eq!(cfg.representations.len(), 2);
        assert_eq!(cfg.out_dir, PathBuf::from("/tmp/out"));
        cfg.validate().unwrap();
    }

    #[test]
    fn round_trips_through_toml() {
        let text = r#"
            seed = 9
            [[representation]]
            name = "r50"
            kind = "random"
            dim = 50
            analyses = ["probe"]
            [predict]
            outer_k = 5
            models = ["rf"]
        "#;
        let cfg = RunConfig::from_toml(text, Path::new("/x")).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.predict.outer_k, 5);
        assert!(!cfg.representations[0].used_in(Analysis::Simdiff));
        let again = RunConfig::from_toml(&cfg.to_toml().unwrap(), Path::new("/x")).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = [
            "unknown_key = 1",
            "[[representation]]\nname = \"a\"\nkind = \"tf\"\n[[representation]]\nname = \"a\"\nkind = \"tfidf\"",
            "[[representation]]\nname = \"g\"\nkind = \"word_vectors\"\npath = \"/no/such/file\"",
            "[[representation]]\nname = \"r\"\nkind = \"random\"",
            "[[representation]]\nname = \"x\"\nkind = \"bert\"",
            "[predict]\nlambda_grid = []",
            "[predict]\nrf_min_samples_leaf = [0]",
            "[analyses]\npredict = true",
        ];
        for text in bad {
            let res = RunConfig::from_toml(text, Path::new("/tmp")).and_then(|c| c.validate());
            assert!(matches!(res, Err(Error::Config(_))), "{text}: {res:?}");
        }
    }

    #[test]
    fn reps_filter() {
        let mut cfg = RunConfig::default();
        cfg.retain_representations(&["tfidf".into()]).unwrap();
        assert_eq!(cfg.representations.len(), 1);
        assert!(cfg.retain_representations(&["nope".into()]).is_err());
    }
}
