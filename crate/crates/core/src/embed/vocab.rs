use std::collections::{HashMap, HashSet};

use crate::corpus::tokenize;
use crate::embed::EmbeddingVector;
use crate::error::{Error, Result};

/// Vocabulary with document frequencies, one document per question.
///
/// Words keep first-occurrence order over the fitting texts.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, usize>,
    doc_freq: Vec<usize>,
    n_docs: usize,
}

impl Vocabulary {
    pub fn fit<'a, I>(documents: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut words = Vec::new();
        let mut index = HashMap::new();
        let mut doc_freq = Vec::new();
        let mut n_docs = 0;
        for doc in documents {
            n_docs += 1;
            let mut seen = HashSet::new();
            for tok in tokenize(doc)? {
                let i = *index.entry(tok.clone()).or_insert_with(|| {
                    words.push(tok.clone());
                    doc_freq.push(0);
                    words.len() - 1
                });
                if seen.insert(i) {
                    doc_freq[i] += 1;
                }
            }
        }
        if n_docs == 0 {
            return Err(Error::BadInput("cannot fit a vocabulary on zero documents".into()));
        }
        Ok(Vocabulary {
            words,
            index,
            doc_freq,
            n_docs,
        })
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn doc_freq(&self, word: &str) -> Option<usize> {
        self.index_of(word).map(|i| self.doc_freq[i])
    }

    /// Raw term counts over the vocabulary; unknown words are dropped.
    pub fn tf_vector(&self, text: &str) -> Result<EmbeddingVector> {
        EmbeddingVector::new(self.tf_counts(&tokenize(text)?))
    }

    /// `tf * ln(N / df)` with the natural logarithm.
    pub fn tfidf_vector(&self, text: &str) -> Result<EmbeddingVector> {
        let mut v = self.tf_counts(&tokenize(text)?);
        for (i, x) in v.iter_mut().enumerate() {
            if *x != 0.0 {
                *x *= self.idf(i)?;
            }
        }
        EmbeddingVector::new(v)
    }

    pub fn idf(&self, i: usize) -> Result<f64> {
        match self.doc_freq.get(i) {
            Some(&df) if df > 0 => Ok((self.n_docs as f64 / df as f64).ln()),
            _ => Err(Error::InternalInvariant(format!(
                "vocabulary word {i} has no document frequency"
            ))),
        }
    }

    fn tf_counts<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<f64> {
        let mut v = vec![0.0; self.words.len()];
        for tok in tokens {
            if let Some(&i) = self.index.get(tok.as_ref()) {
                v[i] += 1.0;
            }
        }
        v
    }

    /// Sorted copy of the words, the order random tables are drawn in.
    pub fn sorted_words(&self) -> Vec<&str> {
        let mut w: Vec<&str> = self.words.iter().map(String::as_str).collect();
        w.sort_unstable();
        w
    }
}
#[cfg(test)]
mod tests {
    use super::*;

    const Q1: &str = "How happy would you say you are?";
    const Q2: &str = "How is your health in general?";

    #[test]
    fn worked_tf_example() {
        let vocab = Vocabulary::fit([Q1]).unwrap();
        assert_eq!(vocab.words(), ["how", "happy", "would", "you", "say", "are"]);
        assert_eq!(vocab.tf_vector(Q1).unwrap().values(), &[1.0, 1.0, 1.0, 2.0, 1.0, 1.0]);
        assert_eq!(vocab.tf_vector(Q2).unwrap().values(), &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(vocab
            .tf_vector("Completely unrelated words")
            .unwrap()
            .values()
            .iter()
            .all(|&x| x == 0.0));
    }

    #[test]
    fn tfidf_weights() {
        // "common" is in every document; "rare" has tf 2 in a doc and df 5 of 10.
        let mut docs: Vec<String> = (0..10).map(|i| format!("common filler{i}")).collect();
        for d in docs.iter_mut().take(5) {
            d.push_str(" rare");
        }
        docs[0].push_str(" rare");
        let vocab = Vocabulary::fit(docs.iter().map(String::as_str)).unwrap();
        let v = vocab.tfidf_vector(&docs[0]).unwrap();
        let rare = vocab.index_of("rare").unwrap();
        let common = vocab.index_of("common").unwrap();
        assert!((v.values()[rare] - 2.0 * 2f64.ln()).abs() < 1e-12);
        assert!((v.values()[rare] - 1.3863).abs() < 1e-4);
        assert_eq!(v.values()[common], 0.0);
    }

    #[test]
    fn single_document_tfidf_is_zero() {
        let vocab = Vocabulary::fit([Q1]).unwrap();
        assert!(vocab.tfidf_vector(Q1).unwrap().values().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn doc_freq_bounds() {
        let docs = ["a b a", "b c", "c c d"];
        let vocab = Vocabulary::fit(docs).unwrap();
        for w in vocab.words() {
            let df = vocab.doc_freq(w).unwrap();
            assert!(df >= 1 && df <= vocab.n_docs());
        }
        assert_eq!(vocab.doc_freq("c"), Some(2));
        assert_eq!(vocab.doc_freq("a"), Some(1));
    }
}
