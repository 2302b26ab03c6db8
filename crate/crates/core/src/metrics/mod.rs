//! Response-quality metrics on full sentences and on content sequences.

mod bleu;
mod embedding;
mod report;

pub use bleu::{distinct_ngrams, sentence_bleu};
pub use embedding::{embedding_similarity, load_embeddings, EmbeddingMode, EmbeddingTable};
pub use report::{evaluate_corpus, MetricReport};

use std::collections::HashSet;
use std::hash::Hash;

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("reference is empty")]
    EmptyReference,
    #[error("BLEU order must be 1 or 2, got {0}")]
    UnsupportedOrder(usize),
    #[error("{refs} references but {hyps} hypotheses")]
    LengthMismatch { refs: usize, hyps: usize },
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("embedding line {line} has {found} values, expected {expected}")]
    DimensionMismatch { line: usize, expected: usize, found: usize },
    #[error("embedding file has no usable vectors")]
    NoVectors,
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Share of the reference's content types that the hypothesis contains, in
/// percent.
pub fn content_coverage<T: Eq + Hash>(c_ref: &[T], c_hyp: &[T]) -> Result<f64, MetricsError> {
    if c_ref.is_empty() {
        return Err(MetricsError::EmptyReference);
    }
    let r: HashSet<&T> = c_ref.iter().collect();
    let h: HashSet<&T> = c_hyp.iter().collect();
    Ok(r.intersection(&h).count() as f64 / r.len() as f64 * 100.0)
}
