//! Training triplets, the epoch loop, two-step decoding and checkpoints.

mod checkpoint;
mod decode;
mod train;
mod triplets;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, MANIFEST_FILE, PARAMS_FILE};
pub use decode::{decode_beam, decode_greedy, generate, generate_with_content, DecodeMode, DecodeOptions, Generation};
pub use train::{train_epoch, EpochReport, TrainConfig};
pub use triplets::{build_training_triplets, read_triplets, write_triplets, TrainingTriplet};

use crate::corpus::CorpusError;
use crate::models::ModelError;
use crate::neural::NeuralError;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("non-finite loss in epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },
    #[error("checkpoint vocabulary hash {expected} does not match loaded vocabulary {found}")]
    VocabMismatch { expected: String, found: String },
    #[error("checkpoint has no data for parameter `{0}`")]
    MissingParam(String),
    #[error("parameter `{name}` has shape {found:?} in the checkpoint, model expects {expected:?}")]
    ShapeMismatch {
        name: String,
        expected: Vec<usize>,
        found: Vec<usize>,
    },
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
    #[error("malformed triplet file at line {line}: {reason}")]
    MalformedTriplet { line: usize, reason: String },
    #[error("{0}")]
    Config(String),
}

impl PipelineError {
    pub(crate) fn io(path: impl std::fmt::Display, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_string(),
            source,
        }
    }
}
