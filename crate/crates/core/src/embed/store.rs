use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::Deserialize;

use crate::embed::EmbeddingVector;
use crate::error::{Error, Result};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Line {
    id: String,
    model: String,
    dim: usize,
    vector: Vec<f64>,
}

/// Precomputed sentence embeddings for one model, keyed by question id.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceEmbeddingStore {
    model_name: String,
    dim: usize,
    entries: HashMap<String, EmbeddingVector>,
    header: Option<serde_json::Value>,
}

impl SentenceEmbeddingStore {
    pub fn model_name(&self) -> &str {
        &self.model_name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&EmbeddingVector> {
        self.entries.get(id)
    }

    /// Free-form metadata from a leading `{"header": {...}}` line, if any.
    pub fn header(&self) -> Option<&serde_json::Value> {
        self.header.as_ref()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

pub fn load_sentence_embeddings(path: &Path) -> Result<SentenceEmbeddingStore> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_sentence_embeddings(file)
}

/// Reads JSONL lines `{"id", "model", "dim", "vector"}`. Blank lines and
/// lines starting with `#` are skipped.
pub fn read_sentence_embeddings<R: Read>(reader: R) -> Result<SentenceEmbeddingStore> {
    let mut model_name: Option<String> = None;
    let mut dim = 0;
    let mut entries = HashMap::new();
    let mut header = None;
    let mut seen_data = false;
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = i + 1;
        let format = |reason: String| Error::Format {
            line: line_no,
            reason,
        };
        let line = line.map_err(|e| format(e.to_string()))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(line).map_err(|e| format(e.to_string()))?;
        if let Some(h) = value.get("header") {
            if seen_data || header.is_some() {
                return Err(format("header line must come first".into()));
            }
            header = Some(h.clone());
            continue;
        }
        seen_data = true;
        let rec: Line = serde_json::from_value(value).map_err(|e| format(e.to_string()))?;
        if rec.vector.len() != rec.dim {
            return Err(format(format!(
                "declared dim {} but {} values",
                rec.dim,
                rec.vector.len()
            )));
        }
        match &model_name {
            None => {
                model_name = Some(rec.model);
                dim = rec.dim;
            }
            Some(m) if *m != rec.model => {
                return Err(format(format!("mixed models {m:?} and {:?}", rec.model)));
            }
            Some(_) if rec.dim != dim => {
                return Err(format(format!("mixed dims {dim} and {}", rec.dim)));
            }
            Some(_) => {}
        }
        let vector = EmbeddingVector::new(rec.vector).map_err(|e| format(e.to_string()))?;
        if entries.insert(rec.id.clone(), vector).is_some() {
            return Err(Error::DuplicateId(rec.id));
        }
    }
    let model_name = model_name.ok_or_else(|| Error::Format {
        line: 0,
        reason: "no embeddings found".into(),
    })?;
    Ok(SentenceEmbeddingStore {
        model_name,
        dim,
        entries,
        header,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const THREE: &str = r#"{"id": "q1", "model": "m", "dim": 2, "vector": [1.0, 0.0]}
{"id": "q2", "model": "m", "dim": 2, "vector": [0.5, 0.5]}

{"id": "q3", "model": "m", "dim": 2, "vector": [0, -1]}
"#;

    #[test]
    fn three_valid_lines() {
        let s = read_sentence_embeddings(THREE.as_bytes()).unwrap();
        assert_eq!((s.len(), s.dim(), s.model_name()), (3, 2, "m"));
        assert_eq!(s.get("q3").unwrap().values(), &[0.0, -1.0]);
    }

    #[test]
    fn short_vector_is_format_error() {
        let values = vec![0.1; 511];
        let line = serde_json::json!({"id": "a", "model": "m", "dim": 512, "vector": values});
        let err = read_sentence_embeddings(line.to_string().as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Format { line: 1, .. }));
    }

    #[test]
    fn mixed_models_and_duplicates() {
        let mixed = THREE.replace(r#""id": "q2", "model": "m""#, r#""id": "q2", "model": "n""#);
        assert!(matches!(read_sentence_embeddings(mixed.as_bytes()), Err(Error::Format { line: 2, .. })));
        let dup = THREE.replace("q3", "q1");
        assert!(matches!(read_sentence_embeddings(dup.as_bytes()), Err(Error::DuplicateId(id)) if id == "q1"));
    }

    #[test]
    fn header_line_is_metadata() {
        let text = format!("{{\"header\": {{\"pooling\": \"mean_last_layer\"}}}}\n{THREE}");
        let s = read_sentence_embeddings(text.as_bytes()).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.header().unwrap()["pooling"], "mean_last_layer");
        let late = format!("{THREE}{{\"header\": {{}}}}\n");
        assert!(read_sentence_embeddings(late.as_bytes()).is_err());
    }

    #[test]
    fn empty_input_is_error() {
        assert!(read_sentence_embeddings("\n# nothing\n".as_bytes()).is_err());
    }
}
