use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::SurveyQuestion;
use crate::error::{Error, Result};

const REQUIRED_COLUMNS: [&str; 8] = [
    "id",
    "text",
    "basic",
    "concrete_id",
    "triad_id",
    "role",
    "formulation",
    "template_id",
];

#[derive(Deserialize)]
struct CorpusRecord {
    id: String,
    text: String,
    basic: String,
    concrete_id: String,
    triad_id: String,
    role: String,
    formulation: String,
    template_id: String,
}

pub fn load_corpus(path: &Path) -> Result<Vec<SurveyQuestion>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_corpus(file)
}

/// Reads a corpus CSV. Token counts and length bins are recomputed from the
/// text; columns carrying them in the file are ignored.
pub fn read_corpus<R: Read>(reader: R) -> Result<Vec<SurveyQuestion>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Schema(format!("corpus header: {e}")))?
        .clone();
    for col in REQUIRED_COLUMNS {
        if !headers.iter().any(|h| h == col) {
            return Err(Error::Schema(format!("corpus is missing column {col:?}")));
        }
    }
    let mut ids = HashSet::new();
    let mut out = Vec::new();
    for rec in rdr.deserialize::<CorpusRecord>() {
        let rec = rec.map_err(|e| Error::Schema(format!("corpus row: {e}")))?;
        if !ids.insert(rec.id.clone()) {
            return Err(Error::DuplicateQuestion(rec.id));
        }
        out.push(SurveyQuestion::new(
            rec.id,
            rec.text,
            rec.basic.parse()?,
            rec.concrete_id,
            rec.triad_id,
            rec.role.parse()?,
            rec.formulation.parse()?,
            rec.template_id,
        )?);
    }
    if out.is_empty() {
        return Err(Error::Schema("corpus has no rows".into()));
    }
    Ok(out)
}

pub fn write_corpus<W: Write>(writer: W, corpus: &[SurveyQuestion]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for q in corpus {
        wtr.serialize(q)?;
    }
    wtr.flush().map_err(|e| Error::io("<corpus writer>", e))?;
    Ok(())
}

/// Counts written next to a generated corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub n_questions: usize,
    pub n_basic_concepts: usize,
    pub n_triads: usize,
    pub n_concrete_concepts: usize,
    pub n_formulations: usize,
    pub n_templates: usize,
    pub per_basic: BTreeMap<String, usize>,
    pub per_formulation: BTreeMap<String, usize>,
    pub per_length_bin: BTreeMap<String, usize>,
}

impl CorpusSummary {
    pub fn of(corpus: &[SurveyQuestion]) -> Self {
        let mut per_basic = BTreeMap::new();
        let mut per_formulation = BTreeMap::new();
        let mut per_length_bin = BTreeMap::new();
        let mut triads = BTreeSet::new();
        let mut concepts = BTreeSet::new();
        let mut templates = BTreeSet::new();
        for q in corpus {
            *per_basic.entry(q.basic.to_string()).or_insert(0) += 1;
            *per_formulation.entry(q.formulation.to_string()).or_insert(0) += 1;
            *per_length_bin.entry(q.length_bin.to_string()).or_insert(0) += 1;
            triads.insert(q.triad_id.as_str());
            concepts.insert(q.concrete_id.as_str());
            templates.insert(q.template_id.as_str());
        }
        CorpusSummary {
            n_questions: corpus.len(),
            n_basic_concepts: per_basic.len(),
            n_triads: triads.len(),
            n_concrete_concepts: concepts.len(),
            n_formulations: per_formulation.len(),
            n_templates: templates.len(),
            per_basic,
            per_formulation,
            per_length_bin,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate_corpus, Role, Taxonomy, TemplateTable};

    const EXAMPLE_TABLE: &str = "\
id,text,basic,concrete_id,triad_id,role,formulation,template_id
1,How good is the state of health services in your country?,evaluation,health_services,t1,reference,DR,DR1
2,Do you agree that the state of health services in your country is good?,evaluation,health_services,t1,reference,InDe,InDe1
3,How good is the state of medical services in your country?,evaluation,medical_services,t1,similar,DR,DR1
4,Do you agree that the state of medical services in your country is good?,evaluation,medical_services,t1,similar,InDe,InDe1
5,How good is the state of religious services in your country?,evaluation,religious_services,t1,dissimilar,DR,DR1
6,Do you agree that the state of religious services in your country is good?,evaluation,religious_services,t1,dissimilar,InDe,InDe1
";

    #[test]
    fn loads_example_table() {
        let corpus = read_corpus(EXAMPLE_TABLE.as_bytes()).unwrap();
        assert_eq!(corpus.len(), 6);
        let concepts: BTreeSet<_> = corpus.iter().map(|q| q.concrete_id.clone()).collect();
        assert_eq!(concepts.len(), 3);
        assert_eq!(corpus[4].role, Role::Dissimilar);
        assert_eq!(corpus[0].n_tokens, 11);
    }

    #[test]
    fn empty_file_is_schema_error() {
        assert!(matches!(read_corpus("".as_bytes()), Err(Error::Schema(_))));
        let header_only = "id,text,basic,concrete_id,triad_id,role,formulation,template_id\n";
        assert!(matches!(read_corpus(header_only.as_bytes()), Err(Error::Schema(_))));
    }

    #[test]
    fn unknown_role_is_schema_error() {
        let bad = EXAMPLE_TABLE.replace("similar,DR", "medium,DR");
        assert!(matches!(read_corpus(bad.as_bytes()), Err(Error::Schema(_))));
    }

    #[test]
    fn duplicate_id_rejected() {
        let bad = EXAMPLE_TABLE.replace("\n2,", "\n1,");
        assert!(matches!(read_corpus(bad.as_bytes()), Err(Error::DuplicateQuestion(_))));
    }

    #[test]
    fn file_token_counts_are_not_trusted() {
        let csv = "id,text,basic,concrete_id,triad_id,role,formulation,template_id,n_tokens,length_bin\n\
                   a,Is it good?,evaluation,c,t,reference,DR,DR2,99,B15_25\n";
        let q = &read_corpus(csv.as_bytes()).unwrap()[0];
        assert_eq!(q.n_tokens, 3);
        assert_eq!(q.length_bin.as_str(), "B0_10");
    }

    #[test]
    fn write_then_read_is_identity() {
        let corpus = generate_corpus(&Taxonomy::shipped(), &TemplateTable::shipped(), 5).unwrap();
        let mut buf = Vec::new();
        write_corpus(&mut buf, &corpus).unwrap();
        assert_eq!(read_corpus(buf.as_slice()).unwrap(), corpus);
    }

    #[test]
    fn summary_counts() {
        let corpus = generate_corpus(&Taxonomy::shipped(), &TemplateTable::shipped(), 5).unwrap();
        let s = CorpusSummary::of(&corpus);
        assert_eq!(
            (s.n_questions, s.n_basic_concepts, s.n_triads, s.n_concrete_concepts, s.n_formulations),
            (2223, 13, 39, 117, 5)
        );
    }
}
