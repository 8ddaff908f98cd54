use std::collections::{HashMap, HashSet};
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use rand::Rng;

use crate::corpus::tokenize;
use crate::embed::{EmbeddingVector, Vocabulary};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Word vectors stored row-major, keyed by lowercased word.
#[derive(Debug, Clone, PartialEq)]
pub struct WordVectorTable {
    dim: usize,
    index: HashMap<String, usize>,
    data: Vec<f64>,
    duplicates: usize,
}

impl WordVectorTable {
    /// Builds a table from in-memory entries. Later duplicates are dropped
    /// and counted, as when loading.
    pub fn from_entries<I>(dim: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, Vec<f64>)>,
    {
        if dim == 0 {
            return Err(Error::InvalidDimension);
        }
        let mut table = WordVectorTable::empty(dim);
        for (word, values) in entries {
            if values.len() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: values.len(),
                });
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::BadInput(format!("vector for {word:?} is not finite")));
            }
            table.push(word.to_lowercase(), &values);
        }
        Ok(table)
    }

    fn empty(dim: usize) -> Self {
        WordVectorTable {
            dim,
            index: HashMap::new(),
            data: Vec::new(),
            duplicates: 0,
        }
    }

    fn push(&mut self, word: String, values: &[f64]) {
        if self.index.contains_key(&word) {
            self.duplicates += 1;
            return;
        }
        self.index.insert(word, self.index.len());
        self.data.extend_from_slice(values);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    /// Number of repeated words skipped while building the table.
    pub fn duplicate_count(&self) -> usize {
        self.duplicates
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.index
            .get(word)
            .map(|&i| &self.data[i * self.dim..(i + 1) * self.dim])
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    /// Element-wise mean over in-vocabulary tokens, counted per occurrence.
    pub fn mean_pool<S: AsRef<str>>(&self, tokens: &[S]) -> Result<EmbeddingVector> {
        let mut sum = vec![0.0; self.dim];
        let mut n = 0usize;
        for tok in tokens {
            if let Some(v) = self.get(tok.as_ref()) {
                for (s, x) in sum.iter_mut().zip(v) {
                    *s += x;
                }
                n += 1;
            }
        }
        if n == 0 {
            let joined: Vec<&str> = tokens.iter().map(AsRef::as_ref).collect();
            return Err(Error::AllOov(joined.join(" ")));
        }
        let n = n as f64;
        EmbeddingVector::new(sum.into_iter().map(|s| s / n).collect())
    }

    pub fn embed_text(&self, text: &str) -> Result<EmbeddingVector> {
        self.mean_pool(&tokenize(text)?)
    }
}

/// Loads a GloVe-style text file: `word v1 ... vd` per line.
pub fn load_word_vectors(path: &Path) -> Result<WordVectorTable> {
    load_word_vectors_filtered(path, None)
}

/// As [`load_word_vectors`], keeping only words in `keep` when given.
/// Lines for other words are checked for field count but not parsed.
pub fn load_word_vectors_filtered(
    path: &Path,
    keep: Option<&HashSet<String>>,
) -> Result<WordVectorTable> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let table = read_word_vectors(file, keep)?;
    if table.duplicate_count() > 0 {
        log::warn!(
            "{}: {} duplicate words ignored",
            path.display(),
            table.duplicate_count()
        );
    }
    Ok(table)
}

pub fn read_word_vectors<R: Read>(
    reader: R,
    keep: Option<&HashSet<String>>,
) -> Result<WordVectorTable> {
    let mut table: Option<WordVectorTable> = None;
    let mut first = true;
    let mut values = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::Format {
            line: line_no,
            reason: e.to_string(),
        })?;
        let line = line.trim_end();
        if line.trim().is_empty() {
            continue;
        }
        // word2vec text files start with a "<count> <dim>" header.
        if std::mem::take(&mut first) && is_count_header(line) {
            continue;
        }
        let mut fields = line.split(' ').filter(|f| !f.is_empty());
        let word = fields.next().unwrap_or_default().to_lowercase();
        let wanted = keep.map_or(true, |k| k.contains(&word));
        values.clear();
        let mut n_fields = 0;
        for f in fields {
            n_fields += 1;
            if wanted {
                let v: f64 = f.parse().map_err(|_| Error::Format {
                    line: line_no,
                    reason: format!("non-numeric value {f:?}"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Format {
                        line: line_no,
                        reason: format!("non-finite value {f:?}"),
                    });
                }
                values.push(v);
            }
        }
        if n_fields == 0 {
            return Err(Error::Format {
                line: line_no,
                reason: "line has a word but no values".into(),
            });
        }
        let t = table.get_or_insert_with(|| WordVectorTable::empty(n_fields));
        if n_fields != t.dim {
            return Err(Error::Format {
                line: line_no,
                reason: format!("expected {} values, found {n_fields}", t.dim),
            });
        }
        if wanted {
            t.push(word, &values);
        }
    }
    table.ok_or_else(|| Error::Format {
        line: 0,
        reason: "no word vectors found".into(),
    })
}

fn is_count_header(line: &str) -> bool {
    let fields: Vec<&str> = line.split_whitespace().collect();
    fields.len() == 2 && fields.iter().all(|f| f.parse::<u64>().is_ok())
}

/// One Uniform(-1, 1) vector per vocabulary word, drawn in sorted word order.
pub fn random_embedding_table(vocab: &Vocabulary, dim: usize, seed: u64) -> Result<WordVectorTable> {
    if dim == 0 {
        return Err(Error::InvalidDimension);
    }
    let mut rng = rng_from_seed(seed);
    let mut table = WordVectorTable::empty(dim);
    let mut row = vec![0.0; dim];
    for word in vocab.sorted_words() {
        for x in row.iter_mut() {
            *x = loop {
                let v: f64 = rng.gen_range(-1.0..1.0);
                if v > -1.0 {
                    break v;
                }
            };
        }
        table.push(word.to_owned(), &row);
    }
    Ok(table)
}
