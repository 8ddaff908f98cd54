//! Convergent and discriminant validity over concept triads.
//!
//! H1 compares a reference question with its similar and dissimilar
//! counterparts under the same template. H2 compares a reference question
//! with itself under another template (near) and with the dissimilar
//! question under the same template (far). A score is `cos_near - cos_far`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{closed_vocabulary, tokenize, BasicConcept, Formulation, Role, SurveyQuestion};
use crate::embed::{cosine, jaccard_tokens, EmbeddingSource, EmbeddingVector, FittedSource};
use crate::error::{Error, Result};

closed_vocabulary! {
    Hypothesis {
        H1 => "H1",
        H2 => "H2",
    }
}

/// Name used for the Jaccard baseline in reports.
pub const JACCARD: &str = "jaccard";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriadScore {
    pub hypothesis: Hypothesis,
    pub basic: BasicConcept,
    pub triad_id: String,
    pub template: String,
    pub template_cmp: String,
    pub formulation: Formulation,
    pub formulation_cmp: Formulation,
    pub cos_near: f64,
    pub cos_far: f64,
    pub diff: f64,
}

struct TriadIndex<'a> {
    /// (basic, triad) in report order.
    triads: Vec<(BasicConcept, &'a str)>,
    templates: Vec<&'a str>,
    cells: HashMap<(&'a str, &'a str, Role), &'a SurveyQuestion>,
}

impl<'a> TriadIndex<'a> {
    fn new(corpus: &'a [SurveyQuestion]) -> Result<Self> {
        let mut triads = BTreeSet::new();
        let mut templates = BTreeSet::new();
        let mut cells = HashMap::new();
        for q in corpus {
            triads.insert((q.basic.as_str(), q.basic, q.triad_id.as_str()));
            templates.insert(q.template_id.as_str());
            cells.insert((q.triad_id.as_str(), q.template_id.as_str(), q.role), q);
        }
        if triads.is_empty() {
            return Err(Error::EmptySplit);
        }
        Ok(TriadIndex {
            triads: triads.into_iter().map(|(_, b, t)| (b, t)).collect(),
            templates: templates.into_iter().collect(),
            cells,
        })
    }

    fn get(&self, triad: &str, template: &str, role: Role) -> Result<&'a SurveyQuestion> {
        self.cells
            .get(&(triad, template, role))
            .copied()
            .ok_or_else(|| Error::IncompleteTriad {
                triad: triad.to_owned(),
                template: template.to_owned(),
            })
    }
}

fn score_with<F>(corpus: &[SurveyQuestion], hypothesis: Hypothesis, sim: F) -> Result<Vec<TriadScore>>
where
    F: Fn(&SurveyQuestion, &SurveyQuestion) -> Result<f64>,
{
    let index = TriadIndex::new(corpus)?;
    let mut out = Vec::new();
    for &(basic, triad) in &index.triads {
        for &t in &index.templates {
            let reference = index.get(triad, t, Role::Reference)?;
            let dissimilar = index.get(triad, t, Role::Dissimilar)?;
            let cos_far = sim(reference, dissimilar)?;
            let mut push = |near: &SurveyQuestion, cos_near: f64| {
                out.push(TriadScore {
                    hypothesis,
                    basic,
                    triad_id: triad.to_owned(),
                    template: t.to_owned(),
                    template_cmp: near.template_id.clone(),
                    formulation: reference.formulation,
                    formulation_cmp: near.formulation,
                    cos_near,
                    cos_far,
                    diff: cos_near - cos_far,
                })
            };
            match hypothesis {
                Hypothesis::H1 => {
                    let similar = index.get(triad, t, Role::Similar)?;
                    push(similar, sim(reference, similar)?);
                }
                Hypothesis::H2 => {
                    for &t2 in index.templates.iter().filter(|&&t2| t2 != t) {
                        let other = index.get(triad, t2, Role::Reference)?;
                        push(other, sim(reference, other)?);
                    }
                }
            }
        }
    }
    Ok(out)
}

fn embed_all(corpus: &[SurveyQuestion], source: &FittedSource) -> Result<HashMap<String, EmbeddingVector>> {
    corpus
        .iter()
        .map(|q| Ok((q.id.clone(), source.embed(&q.id, &q.text)?)))
        .collect()
}

fn cosine_scores(corpus: &[SurveyQuestion], source: &FittedSource, hypothesis: Hypothesis) -> Result<Vec<TriadScore>> {
    let vectors = embed_all(corpus, source)?;
    score_with(corpus, hypothesis, |a, b| cosine(&vectors[&a.id], &vectors[&b.id]))
}

/// One H1 score per (triad, template).
pub fn h1_scores(corpus: &[SurveyQuestion], source: &FittedSource) -> Result<Vec<TriadScore>> {
    cosine_scores(corpus, source, Hypothesis::H1)
}

/// One H2 score per (triad, ordered template pair).
pub fn h2_scores(corpus: &[SurveyQuestion], source: &FittedSource) -> Result<Vec<TriadScore>> {
    cosine_scores(corpus, source, Hypothesis::H2)
}

/// The same pairings scored with Jaccard similarity of token sets.
pub fn jaccard_baseline(corpus: &[SurveyQuestion], hypothesis: Hypothesis) -> Result<Vec<TriadScore>> {
    let tokens: HashMap<&str, Vec<String>> = corpus
        .iter()
        .map(|q| Ok((q.id.as_str(), tokenize(&q.text)?)))
        .collect::<Result<_>>()?;
    score_with(corpus, hypothesis, |a, b| {
        Ok(jaccard_tokens(&tokens[a.id.as_str()], &tokens[b.id.as_str()]))
    })
}

/// Fraction of scores strictly above zero.
pub fn percent_positive(diffs: &[f64]) -> Result<f64> {
    if diffs.is_empty() {
        return Err(Error::EmptySplit);
    }
    Ok(diffs.iter().filter(|&&d| d > 0.0).count() as f64 / diffs.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiveNumber {
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Linear interpolation between order statistics at `(n - 1) p`.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

impl FiveNumber {
    pub fn of(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySplit);
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Ok(FiveNumber {
            n: v.len(),
            min: v[0],
            q1: quantile(&v, 0.25),
            median: quantile(&v, 0.5),
            q3: quantile(&v, 0.75),
            max: v[v.len() - 1],
        })
    }
}

/// Five-number summary of `diff` per basic concept.
/// Keys sort by name.
pub fn distribution_summary(scores: &[TriadScore]) -> Result<BTreeMap<&'static str, FiveNumber>> {
    let mut groups: BTreeMap<&'static str, Vec<f64>> = BTreeMap::new();
    for s in scores {
        groups.entry(s.basic.as_str()).or_default().push(s.diff);
    }
    groups.into_iter().map(|(b, v)| Ok((b, FiveNumber::of(&v)?))).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub representation: String,
    pub hypothesis: Hypothesis,
    pub basic: BasicConcept,
    pub triad_id: String,
    pub template: String,
    pub template_cmp: String,
    pub cos_near: f64,
    pub cos_far: f64,
    pub diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub representation: String,
    pub hypothesis: Hypothesis,
    pub basic: BasicConcept,
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub percent_positive: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PercentRow {
    pub representation: String,
    pub hypothesis: Hypothesis,
    pub n: usize,
    pub percent_positive: f64,
    /// `full_corpus` when the representation was fitted on every question,
    /// including the ones being compared.
    pub vocab_scope: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimdiffReport {
    pub scores: Vec<ScoreRow>,
    pub summary: Vec<SummaryRow>,
    pub percent_positive: Vec<PercentRow>,
}

fn write_rows<W: Write, T: Serialize>(writer: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io("<simdiff report>", e))
}

fn read_rows<R: Read, T: for<'de> Deserialize<'de>>(reader: R) -> Result<Vec<T>> {
    Ok(csv::Reader::from_reader(reader).deserialize().collect::<std::result::Result<_, _>>()?)
}

impl SimdiffReport {
    pub fn write_scores<W: Write>(&self, w: W) -> Result<()> {
        write_rows(w, &self.scores)
    }

    pub fn write_summary<W: Write>(&self, w: W) -> Result<()> {
        write_rows(w, &self.summary)
    }

    pub fn write_percent_positive<W: Write>(&self, w: W) -> Result<()> {
        write_rows(w, &self.percent_positive)
    }

    pub fn read(scores: impl Read, summary: impl Read, percent_positive: impl Read) -> Result<Self> {
        Ok(SimdiffReport {
            scores: read_rows(scores)?,
            summary: read_rows(summary)?,
            percent_positive: read_rows(percent_positive)?,
        })
    }

    fn extend(&mut self, representation: &str, vocab_scope: &str, scores: Vec<TriadScore>) -> Result<()> {
        let Some(first) = scores.first() else {
            return Err(Error::EmptySplit);
        };
        let hypothesis = first.hypothesis;
        let diffs: Vec<f64> = scores.iter().map(|s| s.diff).collect();
        self.percent_positive.push(PercentRow {
            representation: representation.to_owned(),
            hypothesis,
            n: scores.len(),
            percent_positive: percent_positive(&diffs)?,
            vocab_scope: vocab_scope.to_owned(),
        });
        let mut per_basic: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
        for s in &scores {
            per_basic.entry(s.basic.as_str()).or_default().push(s.diff);
        }
        for (basic, five) in distribution_summary(&scores)? {
            self.summary.push(SummaryRow {
                representation: representation.to_owned(),
                hypothesis,
                basic: basic.parse()?,
                n: five.n,
                min: five.min,
                q1: five.q1,
                median: five.median,
                q3: five.q3,
                max: five.max,
                percent_positive: percent_positive(&per_basic[&basic])?,
            });
        }
        self.scores.extend(scores.into_iter().map(|s| ScoreRow {
            representation: representation.to_owned(),
            hypothesis: s.hypothesis,
            basic: s.basic,
            triad_id: s.triad_id,
            template: s.template,
            template_cmp: s.template_cmp,
            cos_near: s.cos_near,
            cos_far: s.cos_far,
            diff: s.diff,
        }));
        Ok(())
    }
}

/// Scores H1 and H2 for the Jaccard baseline and every source. Sources are
/// fitted on the full corpus.
pub fn run_simdiff(corpus: &[SurveyQuestion], sources: &[EmbeddingSource]) -> Result<SimdiffReport> {
    let texts: Vec<&str> = corpus.iter().map(|q| q.text.as_str()).collect();
    let per_source: Vec<Result<(Vec<TriadScore>, Vec<TriadScore>)>> = sources
        .par_iter()
        .map(|s| {
            let fitted = s.fit(texts.iter().copied())?;
            Ok((h1_scores(corpus, &fitted)?, h2_scores(corpus, &fitted)?))
        })
        .collect();
    let mut report = SimdiffReport::default();
    for h in [Hypothesis::H1, Hypothesis::H2] {
        report.extend(JACCARD, "none", jaccard_baseline(corpus, h)?)?;
    }
    for (source, res) in sources.iter().zip(per_source) {
        let (h1, h2) = res?;
        let scope = if source.kind.is_fitted() { "full_corpus" } else { "none" };
        report.extend(&source.name, scope, h1)?;
        report.extend(&source.name, scope, h2)?;
    }
    Ok(report)
}
