use std::sync::Arc;

use crate::embed::{random_embedding_table, EmbeddingVector, SentenceEmbeddingStore, Vocabulary, WordVectorTable};
use crate::error::{Error, Result};

/// How a representation turns question text into a vector.
#[derive(Debug, Clone)]
pub enum SourceKind {
    Tf,
    TfIdf,
    /// Mean-pooled Uniform(-1, 1) word vectors over the fitting vocabulary.
    Random { dim: usize, seed: u64 },
    /// Mean-pooled pretrained word vectors.
    WordVectors(Arc<WordVectorTable>),
    /// Sentence embeddings looked up by question id.
    Precomputed(Arc<SentenceEmbeddingStore>),
}

impl SourceKind {
    pub fn label(&self) -> &'static str {
        match self {
            SourceKind::Tf => "tf",
            SourceKind::TfIdf => "tfidf",
            SourceKind::Random { .. } => "random",
            SourceKind::WordVectors(_) => "word_vectors",
            SourceKind::Precomputed(_) => "precomputed",
        }
    }

    /// True when fitting depends on the training texts.
    pub fn is_fitted(&self) -> bool {
        matches!(self, SourceKind::Tf | SourceKind::TfIdf | SourceKind::Random { .. })
    }
}

/// A named representation, not yet fitted to any texts.
#[derive(Debug, Clone)]
pub struct EmbeddingSource {
    pub name: String,
    pub kind: SourceKind,
}

impl EmbeddingSource {
    pub fn new(name: impl Into<String>, kind: SourceKind) -> Self {
        EmbeddingSource {
            name: name.into(),
            kind,
        }
    }

    /// Fits vocabulary-based kinds on `texts`; other kinds ignore them.
    pub fn fit<'a, I>(&self, texts: I) -> Result<FittedSource>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let inner = match &self.kind {
            SourceKind::Tf => Fitted::Tf(Vocabulary::fit(texts)?),
            SourceKind::TfIdf => Fitted::TfIdf(Vocabulary::fit(texts)?),
            SourceKind::Random { dim, seed } => {
                let vocab = Vocabulary::fit(texts)?;
                Fitted::Pooled(Arc::new(random_embedding_table(&vocab, *dim, *seed)?))
            }
            SourceKind::WordVectors(t) => Fitted::Pooled(Arc::clone(t)),
            SourceKind::Precomputed(s) => Fitted::Precomputed(Arc::clone(s)),
        };
        let dim = match &inner {
            Fitted::Tf(v) | Fitted::TfIdf(v) => v.len(),
            Fitted::Pooled(t) => t.dim(),
            Fitted::Precomputed(s) => s.dim(),
        };
        if dim == 0 {
            return Err(Error::InvalidDimension);
        }
        Ok(FittedSource {
            name: self.name.clone(),
            inner,
            dim,
        })
    }
}

#[derive(Debug, Clone)]
enum Fitted {
    Tf(Vocabulary),
    TfIdf(Vocabulary),
    Pooled(Arc<WordVectorTable>),
    Precomputed(Arc<SentenceEmbeddingStore>),
}

/// A representation ready to embed questions.
#[derive(Debug, Clone)]
pub struct FittedSource {
    name: String,
    inner: Fitted,
    dim: usize,
}

impl FittedSource {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn embed(&self, id: &str, text: &str) -> Result<EmbeddingVector> {
        match &self.inner {
            Fitted::Tf(v) => v.tf_vector(text),
            Fitted::TfIdf(v) => v.tfidf_vector(text),
            Fitted::Pooled(t) => t.embed_text(text),
            Fitted::Precomputed(s) => s.get(id).cloned().ok_or_else(|| Error::MissingEmbedding {
                id: id.to_owned(),
                source_name: self.name.clone(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::read_sentence_embeddings;

    #[test]
    fn tf_source_refits_per_training_set() {
        let src = EmbeddingSource::new("tf", SourceKind::Tf);
        let fitted = src.fit(["How happy would you say you are?"]).unwrap();
        assert_eq!(fitted.dim(), 6);
        let v = fitted.embed("x", "How is your health in general?").unwrap();
        assert_eq!(v.values(), &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn precomputed_source_reports_missing_ids() {
        let store = read_sentence_embeddings(
            r#"{"id": "a", "model": "m", "dim": 2, "vector": [1, 2]}"#.as_bytes(),
        )
        .unwrap();
        let src = EmbeddingSource::new("enc", SourceKind::Precomputed(Arc::new(store)));
        let fitted = src.fit(std::iter::empty()).unwrap();
        assert_eq!(fitted.embed("a", "ignored").unwrap().values(), &[1.0, 2.0]);
        match fitted.embed("b", "text") {
            Err(Error::MissingEmbedding { id, source_name }) => {
                assert_eq!((id.as_str(), source_name.as_str()), ("b", "enc"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn random_source_has_requested_dim() {
        let src = EmbeddingSource::new("random300", SourceKind::Random { dim: 300, seed: 1 });
        let fitted = src.fit(["is it good", "is it bad"]).unwrap();
        assert_eq!(fitted.embed("q", "Is it good?").unwrap().dim(), 300);
        assert!(matches!(fitted.embed("q", "unseen words only"), Err(Error::AllOov(_))));
    }
}
