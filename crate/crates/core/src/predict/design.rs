use std::collections::{BTreeMap, BTreeSet, HashMap};

use ndarray::Array2;

use super::{Respondent, ResponseRecord};
use crate::embed::FittedSource;
use crate::error::{Error, Result};

/// One-hot layout of the background variables. Categories are sorted per
/// variable and fixed from the full respondent table, so every fold shares
/// the same columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackgroundEncoder {
    variables: Vec<(String, Vec<String>)>,
}

impl BackgroundEncoder {
    pub fn fit(respondents: &[Respondent], variables: &[String]) -> Result<Self> {
        let mut out = Vec::with_capacity(variables.len());
        for var in variables {
            let mut cats = BTreeSet::new();
            for r in respondents {
                let v = r
                    .background
                    .get(var)
                    .ok_or_else(|| Error::Schema(format!("respondent {} lacks background variable {var:?}", r.id)))?;
                cats.insert(v.clone());
            }
            out.push((var.clone(), cats.into_iter().collect()));
        }
        Ok(BackgroundEncoder { variables: out })
    }

    /// An encoder with no columns.
    pub fn empty() -> Self {
        BackgroundEncoder { variables: Vec::new() }
    }

    pub fn width(&self) -> usize {
        self.variables.iter().map(|(_, c)| c.len()).sum()
    }

    /// Column names as `variable=category`.
    pub fn column_names(&self) -> Vec<String> {
        self.variables
            .iter()
            .flat_map(|(v, cats)| cats.iter().map(move |c| format!("{v}={c}")))
            .collect()
    }

    pub fn encode(&self, respondent: &Respondent) -> Result<Vec<f64>> {
        let mut row = vec![0.0; self.width()];
        let mut offset = 0;
        for (var, cats) in &self.variables {
            let value = respondent
                .background
                .get(var)
                .ok_or_else(|| Error::Schema(format!("respondent {} lacks background variable {var:?}", respondent.id)))?;
            let j = cats
                .binary_search(value)
                .map_err(|_| Error::Schema(format!("category {value:?} of {var:?} was not seen when encoding")))?;
            row[offset + j] = 1.0;
            offset += cats.len();
        }
        Ok(row)
    }
}

/// A single assembled observation.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignRow {
    pub features: Vec<f64>,
    pub target: f64,
}

/// Feature matrix with one row per response record: the background one-hot
/// block followed by the question representation.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub x: Array2<f64>,
    pub y: Vec<f64>,
    pub question_ids: Vec<String>,
    pub respondent_ids: Vec<String>,
    pub background_width: usize,
}

impl Design {
    pub fn n_rows(&self) -> usize {
        self.y.len()
    }

    pub fn width(&self) -> usize {
        self.x.ncols()
    }

    pub fn row(&self, i: usize) -> DesignRow {
        DesignRow {
            features: self.x.row(i).to_vec(),
            target: self.y[i],
        }
    }

    /// Rows at `idx`, in that order.
    pub fn select(&self, idx: &[usize]) -> Design {
        Design {
            x: self.x.select(ndarray::Axis(0), idx),
            y: idx.iter().map(|&i| self.y[i]).collect(),
            question_ids: idx.iter().map(|&i| self.question_ids[i].clone()).collect(),
            respondent_ids: idx.iter().map(|&i| self.respondent_ids[i].clone()).collect(),
            background_width: self.background_width,
        }
    }
}

/// Builds one design row per record. A question whose words are all unknown
/// to a pooled source gets an all-zero representation block, the same as an
/// unseen question under TF.
pub fn build_design(
    records: &[ResponseRecord],
    respondents: &[Respondent],
    encoder: &BackgroundEncoder,
    source: &FittedSource,
    question_texts: &BTreeMap<String, String>,
) -> Result<Design> {
    let by_id: HashMap<&str, &Respondent> = respondents.iter().map(|r| (r.id.as_str(), r)).collect();
    let dim = source.dim();
    let bw = encoder.width();
    let mut reps: HashMap<&str, Vec<f64>> = HashMap::new();
    let mut backgrounds: HashMap<&str, Vec<f64>> = HashMap::new();
    let mut x = Array2::zeros((records.len(), bw + dim));
    for (i, rec) in records.iter().enumerate() {
        if !backgrounds.contains_key(rec.respondent_id.as_str()) {
            let resp = by_id
                .get(rec.respondent_id.as_str())
                .ok_or_else(|| Error::Schema(format!("unknown respondent {}", rec.respondent_id)))?;
            backgrounds.insert(&rec.respondent_id, encoder.encode(resp)?);
        }
        if !reps.contains_key(rec.question_id.as_str()) {
            let text = question_texts
                .get(&rec.question_id)
                .ok_or_else(|| Error::Schema(format!("question {} has no text", rec.question_id)))?;
            let v = match source.embed(&rec.question_id, text) {
                Ok(v) => v.into_inner(),
                Err(Error::AllOov(_)) => vec![0.0; dim],
                Err(e) => return Err(e),
            };
            if v.len() != dim {
                return Err(Error::DimensionMismatch { left: dim, right: v.len() });
            }
            reps.insert(&rec.question_id, v);
        }
        let mut row = x.row_mut(i);
        for (j, &v) in backgrounds[rec.respondent_id.as_str()].iter().enumerate() {
            row[j] = v;
        }
        for (j, &v) in reps[rec.question_id.as_str()].iter().enumerate() {
            row[bw + j] = v;
        }
    }
    Ok(Design {
        x,
        y: records.iter().map(|r| r.response).collect(),
        question_ids: records.iter().map(|r| r.question_id.clone()).collect(),
        respondent_ids: records.iter().map(|r| r.respondent_id.clone()).collect(),
        background_width: bw,
    })
}
