//! Construct-validity bench for text embeddings of survey questions.
//!
//! The crate generates a synthetic minimal-pair question corpus, turns
//! questions into vectors through several representation sources and runs
//! three analyses over them: probing classifiers (content validity), cosine
//! difference scores over concept triads (convergent and discriminant
//! validity), and cross-validated prediction of survey responses
//! (predictive validity).

pub mod config;
pub mod corpus;
pub mod embed;
pub mod error;
pub mod pipeline;
pub mod predict;
pub mod probe;
pub mod report;
pub mod rng;
pub mod simdiff;
pub mod special;

pub use error::{Error, Result};
