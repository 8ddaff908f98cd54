//! Text representations and similarity kernels.

mod source;
mod store;
mod vector;
mod vocab;
mod word_vectors;

pub use source::{EmbeddingSource, FittedSource, SourceKind};
pub use store::{load_sentence_embeddings, read_sentence_embeddings, SentenceEmbeddingStore};
pub use vector::{cosine, cosine_slices, jaccard, jaccard_tokens, EmbeddingVector};
pub use vocab::Vocabulary;
pub use word_vectors::{
    load_word_vectors, load_word_vectors_filtered, random_embedding_table, read_word_vectors,
    WordVectorTable,
};
