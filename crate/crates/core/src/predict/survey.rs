use std::collections::{BTreeMap, HashSet};
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Background category used for empty cells.
pub const MISSING: &str = "missing";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Respondent {
    pub id: String,
    pub background: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseRecord {
    pub respondent_id: String,
    pub question_id: String,
    /// Rescaled to [0, 1].
    pub response: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestOptions {
    pub id_column: String,
    pub background: Vec<String>,
    /// Raw codes meaning refusal, don't know and similar; dropped.
    pub missing_codes: Vec<f64>,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            id_column: "idno".into(),
            background: [
                "region",
                "gender",
                "education",
                "household_income",
                "religion",
                "citizenship",
                "birthplace",
                "language",
                "minority_status",
                "marital_past",
                "marital_status",
            ]
            .map(String::from)
            .to_vec(),
            missing_codes: vec![77.0, 88.0, 99.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurveyData {
    pub respondents: Vec<Respondent>,
    pub records: Vec<ResponseRecord>,
    pub question_texts: BTreeMap<String, String>,
    /// Cells dropped as empty or carrying a missing code.
    pub n_dropped: usize,
}

#[derive(Deserialize)]
struct ScaleLine {
    question_id: String,
    min: f64,
    max: f64,
}

#[derive(Deserialize)]
struct TextLine {
    question_id: String,
    text: String,
}

/// `question_id,min,max` rows; each range must be non-degenerate.
pub fn read_scale_table<R: Read>(reader: R) -> Result<BTreeMap<String, (f64, f64)>> {
    let mut out = BTreeMap::new();
    for line in csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader).deserialize() {
        let ScaleLine { question_id, min, max } = line.map_err(|e| Error::Schema(format!("scale table: {e}")))?;
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(Error::Schema(format!("scale for {question_id} has min {min} and max {max}")));
        }
        if out.insert(question_id.clone(), (min, max)).is_some() {
            return Err(Error::DuplicateId(question_id));
        }
    }
    Ok(out)
}

/// `question_id,text` rows.
pub fn read_question_texts<R: Read>(reader: R) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for line in csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader).deserialize() {
        let TextLine { question_id, text } = line.map_err(|e| Error::Schema(format!("question texts: {e}")))?;
        if out.insert(question_id.clone(), text).is_some() {
            return Err(Error::DuplicateId(question_id));
        }
    }
    Ok(out)
}

pub fn rescale(raw: f64, min: f64, max: f64) -> f64 {
    (raw - min) / (max - min)
}

pub fn load_survey(responses: &Path, questions: &Path, scales: &Path, opts: &IngestOptions) -> Result<SurveyData> {
    let open = |p: &Path| std::fs::File::open(p).map_err(|e| Error::io(p, e));
    ingest_survey(open(responses)?, open(questions)?, open(scales)?, opts)
}

/// Turns a wide response table (one row per respondent) into long records.
pub fn ingest_survey<R1: Read, R2: Read, R3: Read>(
    responses: R1,
    questions: R2,
    scales: R3,
    opts: &IngestOptions,
) -> Result<SurveyData> {
    let question_texts = read_question_texts(questions)?;
    let scales = read_scale_table(scales)?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(responses);
    let headers = rdr.headers().map_err(|e| Error::Schema(format!("responses header: {e}")))?.clone();

    let col = |name: &str| headers.iter().position(|h| h == name);
    let id_col = col(&opts.id_column)
        .ok_or_else(|| Error::Schema(format!("responses lack the id column {:?}", opts.id_column)))?;
    let mut background_cols = Vec::new();
    for var in &opts.background {
        let i = col(var).ok_or_else(|| Error::Schema(format!("responses lack background column {var:?}")))?;
        background_cols.push((var.clone(), i));
    }
    let known: HashSet<usize> = background_cols.iter().map(|(_, i)| *i).chain([id_col]).collect();
    let mut question_cols = Vec::new();
    for (i, name) in headers.iter().enumerate().filter(|(i, _)| !known.contains(i)) {
        let Some(&(min, max)) = scales.get(name) else {
            return Err(Error::Schema(format!("column {name:?} is not a background variable or a scaled question")));
        };
        if !question_texts.contains_key(name) {
            return Err(Error::Schema(format!("question {name:?} has no text")));
        }
        question_cols.push((name.to_owned(), i, min, max));
    }

    let mut respondents = Vec::new();
    let mut records = Vec::new();
    let mut ids = HashSet::new();
    let mut n_dropped = 0;
    for row in rdr.records() {
        let row = row.map_err(|e| Error::Schema(format!("responses: {e}")))?;
        let id = row[id_col].to_owned();
        if !ids.insert(id.clone()) {
            return Err(Error::DuplicateId(id));
        }
        let background = background_cols
            .iter()
            .map(|(var, i)| {
                let v = &row[*i];
                (var.clone(), if v.is_empty() { MISSING.to_owned() } else { v.to_owned() })
            })
            .collect();
        for (qid, i, min, max) in &question_cols {
            let cell = &row[*i];
            if cell.is_empty() {
                n_dropped += 1;
                continue;
            }
            let raw: f64 = cell
                .parse()
                .map_err(|_| Error::Schema(format!("respondent {id}, question {qid}: non-numeric {cell:?}")))?;
            if opts.missing_codes.contains(&raw) {
                n_dropped += 1;
                continue;
            }
            if !(raw >= *min && raw <= *max) {
                return Err(Error::ScaleViolation {
                    question: qid.clone(),
                    value: raw,
                });
            }
            records.push(ResponseRecord {
                respondent_id: id.clone(),
                question_id: qid.clone(),
                response: rescale(raw, *min, *max),
            });
        }
        respondents.push(Respondent { id, background });
    }
    Ok(SurveyData {
        respondents,
        records,
        question_texts,
        n_dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> IngestOptions {
        IngestOptions {
            id_column: "idno".into(),
            background: vec!["gender".into()],
            missing_codes: vec![77.0, 88.0],
        }
    }

    const TEXTS: &str = "question_id,text\nhappy,How happy are you?\ntrust,How much do you trust parliament?\n";
    const SCALES: &str = "question_id,min,max\nhappy,0,10\ntrust,1,5\n";

    #[test]
    fn rescales_and_drops_missing() {
        let responses = "idno,gender,happy,trust\n1,f,7,3\n2,,88,\n";
        let data = ingest_survey(responses.as_bytes(), TEXTS.as_bytes(), SCALES.as_bytes(), &opts()).unwrap();
        assert_eq!(data.records.len(), 2);
        assert!((data.records[0].response - 0.7).abs() < 1e-15);
        assert_eq!(data.records[1].response, 0.5);
        assert_eq!(data.n_dropped, 2);
        assert_eq!(data.respondents[1].background["gender"], MISSING);
    }

    #[test]
    fn out_of_scale_value() {
        let responses = "idno,gender,happy,trust\n1,f,7,6\n";
        let err = ingest_survey(responses.as_bytes(), TEXTS.as_bytes(), SCALES.as_bytes(), &opts()).unwrap_err();
        assert!(matches!(err, Error::ScaleViolation { question, value } if question == "trust" && value == 6.0));
    }

    #[test]
    fn unknown_column_is_schema_error() {
        let responses = "idno,gender,happy,mystery\n1,f,7,3\n";
        let err = ingest_survey(responses.as_bytes(), TEXTS.as_bytes(), SCALES.as_bytes(), &opts()).unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
    }

    #[test]
    fn rescale_examples() {
        assert_eq!(rescale(7.0, 0.0, 10.0), 0.7);
        assert_eq!(rescale(3.0, 1.0, 5.0), 0.5);
    }
}
