//! Report files written to the output directory.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::corpus::{write_corpus, CorpusSummary, SurveyQuestion};
use crate::error::{Error, Result};
use crate::predict::{PredictReport, PredictRow};
use crate::probe::ProbeReport;
use crate::simdiff::SimdiffReport;

pub const CORPUS_CSV: &str = "corpus.csv";
pub const CORPUS_SUMMARY_JSON: &str = "corpus_summary.json";
pub const PROBE_CSV: &str = "probe_report.csv";
pub const SIMDIFF_SCORES_CSV: &str = "simdiff_scores.csv";
pub const SIMDIFF_SUMMARY_CSV: &str = "simdiff_summary.csv";
pub const SIMDIFF_PERCENT_CSV: &str = "simdiff_percent_positive.csv";
pub const PREDICT_CSV: &str = "predict_report.csv";
pub const DIAGNOSTICS_JSON: &str = "diagnostics.json";
pub const METADATA_JSON: &str = "metadata.json";

/// SHA-256 of the config's canonical JSON form, output directory excluded,
/// so runs that differ only in where they write compare equal.
pub fn config_hash(config: &RunConfig) -> Result<String> {
    let mut c = config.clone();
    c.out_dir = Default::default();
    let bytes = serde_json::to_vec(&c)?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub config_sha256: String,
    pub representations: Vec<String>,
}

impl RunMetadata {
    pub fn new(command: &str, config: &RunConfig) -> Result<Self> {
        Ok(RunMetadata {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed: config.seed,
            config_sha256: config_hash(config)?,
            representations: config.representations.iter().map(|r| r.name.clone()).collect(),
        })
    }
}

/// Non-tabular outcomes worth auditing.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Predictive cells that failed, as `representation/model: reason`.
    pub predict_failed_cells: Vec<String>,
    /// Baseline predictions that fell back to the global mean.
    pub predict_baseline_fallbacks: usize,
    /// Survey cells dropped as empty or missing-coded.
    pub survey_dropped_cells: usize,
}

/// Everything one command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidityReport {
    pub metadata: RunMetadata,
    pub corpus: Option<Vec<SurveyQuestion>>,
    pub probe: Option<ProbeReport>,
    pub simdiff: Option<SimdiffReport>,
    pub predict: Option<PredictReport>,
    pub diagnostics: Diagnostics,
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    File::create(&path).map(BufWriter::new).map_err(|e| Error::io(&path, e))
}

fn open(dir: &Path, name: &str) -> Result<BufReader<File>> {
    let path = dir.join(name);
    File::open(&path).map(BufReader::new).map_err(|e| Error::io(&path, e))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| Error::io(dir.join(name), e))
}

fn read_json<T: for<'de> Deserialize<'de>>(dir: &Path, name: &str) -> Result<T> {
    Ok(serde_json::from_reader(open(dir, name)?)?)
}

impl ValidityReport {
    /// Writes every present section plus metadata; returns the file names.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<&'static str>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut written = Vec::new();
        if let Some(corpus) = &self.corpus {
            write_corpus(create(dir, CORPUS_CSV)?, corpus)?;
            write_json(dir, CORPUS_SUMMARY_JSON, &CorpusSummary::of(corpus))?;
            written.extend([CORPUS_CSV, CORPUS_SUMMARY_JSON]);
        }
        if let Some(probe) = &self.probe {
            probe.write_csv(create(dir, PROBE_CSV)?)?;
            written.push(PROBE_CSV);
        }
        if let Some(s) = &self.simdiff {
            s.write_scores(create(dir, SIMDIFF_SCORES_CSV)?)?;
            s.write_summary(create(dir, SIMDIFF_SUMMARY_CSV)?)?;
            s.write_percent_positive(create(dir, SIMDIFF_PERCENT_CSV)?)?;
            written.extend([SIMDIFF_SCORES_CSV, SIMDIFF_SUMMARY_CSV, SIMDIFF_PERCENT_CSV]);
        }
        if let Some(p) = &self.predict {
            p.write_csv(create(dir, PREDICT_CSV)?)?;
            written.push(PREDICT_CSV);
        }
        write_json(dir, DIAGNOSTICS_JSON, &self.diagnostics)?;
        write_json(dir, METADATA_JSON, &self.metadata)?;
        written.extend([DIAGNOSTICS_JSON, METADATA_JSON]);
        Ok(written)
    }

    /// Reads back whatever sections exist in `dir`.
    pub fn read_from(dir: &Path) -> Result<Self> {
        let exists = |name: &str| dir.join(name).is_file();
        let corpus = if exists(CORPUS_CSV) {
            Some(crate::corpus::read_corpus(open(dir, CORPUS_CSV)?)?)
        } else {
            None
        };
        let probe = if exists(PROBE_CSV) {
            Some(ProbeReport::read_csv(open(dir, PROBE_CSV)?)?)
        } else {
            None
        };
        let simdiff = if exists(SIMDIFF_SCORES_CSV) {
            Some(SimdiffReport::read(
                open(dir, SIMDIFF_SCORES_CSV)?,
                open(dir, SIMDIFF_SUMMARY_CSV)?,
                open(dir, SIMDIFF_PERCENT_CSV)?,
            )?)
        } else {
            None
        };
        let diagnostics: Diagnostics = read_json(dir, DIAGNOSTICS_JSON)?;
        let predict = if exists(PREDICT_CSV) {
            let rows: Vec<PredictRow> = PredictReport::read_csv(open(dir, PREDICT_CSV)?)?;
            Some(PredictReport {
                rows,
                diagnostics: diagnostics.predict_failed_cells.clone(),
                n_fallback: diagnostics.predict_baseline_fallbacks,
            })
        } else {
            None
        };
        Ok(ValidityReport {
            metadata: read_json(dir, METADATA_JSON)?,
            corpus,
            probe,
            simdiff,
            predict,
            diagnostics,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_ignores_out_dir_but_not_seed() {
        let a = RunConfig::default();
        let mut b = a.clone();
        b.out_dir = "elsewhere".into();
        assert_eq!(config_hash(&a).unwrap(), config_hash(&b).unwrap());
        b.seed = 1;
        assert_ne!(config_hash(&a).unwrap(), config_hash(&b).unwrap());
        assert_eq!(config_hash(&a).unwrap().len(), 64);
    }
}
